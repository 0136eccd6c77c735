"""Parsing, desugaring, arity handling, and the pretty-print round trip."""

import pytest

from inetc import parse_net, parse_program, net_alpha_equivalent, rule_alpha_equivalent
from inetc.core import Agent, Var, agent_positions, free_variables
from inetc.diagnostics import ArityError, LinearityError, ParseError
from inetc.printer import format_net, format_program, format_rule


class TestRules:
    def test_explicit_rule(self):
        prog = parse_program("Lst(r) >< Cons(x,Nil) => r~x")
        (rule,) = prog.rules
        assert rule.lhs.root_names() == ("Lst", "Cons")
        assert rule.lhs.is_inp()
        assert [format_net(rule.rhs)] == ["r~x"]

    def test_repeated_variable_means_wire(self):
        prog = parse_program("Aux(x,x) >< Nil")
        (rule,) = prog.rules
        assert rule.lhs.is_orn()
        expected = parse_program("Aux(x,y) >< Nil => x~y").rules[0]
        assert rule_alpha_equivalent(rule, expected)

    def test_nested_pattern_position(self):
        prog = parse_program("Lst(r) >< Cons(x,Cons(y,ys)) => x~Eps, Lst(r)~Cons(y,ys)")
        (rule,) = prog.rules
        assert agent_positions(rule.lhs) == [(2, 2)]

    def test_folded_right_side(self):
        # A rule without '=>' folds nested agents out into the right side.
        folded = parse_program("Lst(r) >< Cons(x,Aux(x,r))").rules[0]
        explicit = parse_program("Lst(r) >< Cons(x,xs) => xs~Aux(x,r)").rules[0]
        assert folded.lhs.is_orn()
        assert rule_alpha_equivalent(folded, explicit)

    def test_empty_right_side_with_arrow(self):
        prog = parse_program("Eps >< One =>")
        assert prog.rules[0].rhs.equations == ()

    def test_nested_pattern_requires_arrow(self):
        # Without '=>' the nesting is folded-out net content, not a pattern,
        # so this spelling drops the ports r and x and is rejected...
        with pytest.raises(LinearityError):
            parse_program("Lst(r) >< Cons(x,Nil)")
        # ...while the same text with '=>' is a nested pattern.
        rule = parse_program("Lst(r) >< Cons(x,Nil) => r~x").rules[0]
        assert rule.lhs.is_inp()

    def test_rule_without_ports_needs_no_right_side(self):
        rule = parse_program("Eps >< One").rules[0]
        assert rule.lhs.is_orn()
        assert rule.rhs.equations == ()

    def test_pattern_variable_repeated_with_arrow_rejected(self):
        with pytest.raises(LinearityError):
            parse_program("Aux(x,x) >< Nil => x~x")

    def test_port_must_be_preserved(self):
        with pytest.raises(LinearityError) as exc:
            parse_program("Lst(r) >< Cons(x,xs) => r~x")
        assert "xs" in str(exc.value)

    def test_right_side_variable_discipline(self):
        with pytest.raises(LinearityError):
            parse_program("Eps >< One => y~Nil")  # y occurs once, not a port
        with pytest.raises(LinearityError):
            parse_program("F(x) >< G(y) => x~y, x~y")  # three occurrences


class TestNets:
    def test_flattening_introduces_wires(self):
        net = parse_net("Lst(r)~Cons(One,Nil)")
        assert len(net.equations) == 3
        texts = [format_net(parse_net("Lst(r)~Cons(a,b), a~One, b~Nil"))]
        assert net_alpha_equivalent(net, parse_net(texts[0]))

    def test_empty(self):
        assert parse_net("").equations == ()

    def test_single_wire(self):
        net = parse_net("x~y")
        assert free_variables(net) == {"x", "y"}

    def test_net_linearity_enforced(self):
        with pytest.raises(LinearityError):
            parse_net("x~A, x~B, x~C")

    def test_one_net_per_program(self):
        with pytest.raises(ParseError):
            parse_program("net x~y\nnet a~b")


class TestSymbols:
    def test_arity_inferred_and_enforced(self):
        with pytest.raises(ArityError) as exc:
            parse_program("F(x) >< G(y) => x~y\nF(a,b) >< H => a~b")
        assert exc.value.symbol == "F"
        assert (exc.value.expected, exc.value.found) == (1, 2)

    def test_explicit_declaration(self):
        prog = parse_program("agent Cons : 2\nagent Nil : 0\nnet Lst(r)~Cons(One,Nil)")
        assert prog.symbols["Cons"].arity == 2

    def test_declaration_conflicts_with_use(self):
        with pytest.raises(ArityError):
            parse_program("net x~Cons(a,b), a~One, b~Nil\nagent Cons : 3")

    def test_numerals_rejected(self):
        with pytest.raises(ParseError) as exc:
            parse_net("Lst(r)~Cons(1,Nil)")
        assert "zero-arity" in exc.value.diagnostics[0].message

    def test_strings_rejected(self):
        with pytest.raises(ParseError):
            parse_program('F(x) >< G(y) => x~"hello"')

    def test_comments_ignored(self):
        prog = parse_program("// a list program\nEps >< One // erase\n")
        assert len(prog.rules) == 1


class TestRoundTrip:
    SOURCES = [
        "Lst(r) >< Cons(x,Nil) => r~x",
        "Lst(r) >< Cons(x,Cons(y,ys)) => x~Eps, Lst(r)~Cons(y,ys)",
        "Aux(x,x) >< Nil",
        "Dup(a,b) >< S(x) => a~S(p), b~S(q), Dup(p,q)~x",
        "Dup(a,b) >< Z => a~Z, b~Z",
    ]

    @pytest.mark.parametrize("source", SOURCES)
    def test_rule_round_trip(self, source):
        rule = parse_program(source).rules[0]
        text = format_rule(rule)
        again = parse_program(text).rules[0]
        assert rule_alpha_equivalent(rule, again)
        assert format_rule(again) == text

    NETS = [
        "p~Lst(r), p~Cons(x,xs), x~One, xs~Nil",
        "Lst(r)~Cons(One,Cons(Two,Nil))",
        "x~y",
        "a~Dup(b,c), b~S(d), d~Z",
        "",
    ]

    @pytest.mark.parametrize("source", NETS)
    def test_net_round_trip(self, source):
        net = parse_net(source)
        again = parse_net(format_net(net))
        assert net_alpha_equivalent(net, again)

    def test_program_print_is_idempotent(self):
        prog = parse_program(
            "Lst(r) >< Cons(x,Nil) => r~x\nAux(x,x) >< Nil\nnet Lst(q)~Cons(One,Nil)"
        )
        text = format_program(prog.rules, prog.initial_net)
        reparsed = parse_program(text)
        assert format_program(reparsed.rules, reparsed.initial_net) == text

    def test_fresh_wires_do_not_collide_with_user_names(self):
        # Desugared wires live in a separate namespace even if the user
        # happens to use names like var0 or w0.
        prog = parse_program("net var0~Cons(One,Nil), w0~var0")
        counts = {}
        for eq in prog.initial_net.equations:
            from inetc.core import term_vars

            for v in list(term_vars(eq.left)) + list(term_vars(eq.right)):
                counts[v] = counts.get(v, 0) + 1
        assert all(n <= 2 for n in counts.values())
        assert free_variables(prog.initial_net) == {"w0"}


class TestSyntaxErrors:
    @pytest.mark.parametrize(
        "source",
        [
            "Lst(r) > Cons(x)",
            "Lst(r) >< Cons(x",
            "Lst(r) =< Cons(x)",
            "net x~",
            "lst(r) >< Cons(x,xs) => r~x, x~xs",  # variable left of ><
            "agent cons : 2",
            "F(x) ><",
        ],
    )
    def test_rejected(self, source):
        with pytest.raises(ParseError):
            parse_program(source)

    def test_spans_reported(self):
        with pytest.raises(ParseError) as exc:
            parse_program("Eps >< One\nLst(r) >< ,")
        span = exc.value.diagnostics[0].span
        assert span.start_line == 2
