"""Instantiation, rule application, reduction strategies, and readback."""

import pytest

from inetc import (
    instantiate,
    net_alpha_equivalent,
    parse_net,
    parse_program,
    readback,
    reduce,
    translate_program,
)
from inetc.diagnostics import MatchFailure, StepLimitExceeded
from inetc.printer import canonical_net, format_net
from inetc.runtime import apply_rule

from conftest import ERASE_RULES, LASTELT_NESTED, ONE_ITEM_NET, TWO_ITEM_NET

ALL_STRATEGIES = [("fifo", 0), ("lifo", 0)] + [("random", seed) for seed in range(1, 21)]


def _lastelt_rules():
    prog = parse_program(LASTELT_NESTED + ERASE_RULES)
    return prog, translate_program(prog.rules, prog.symbols)


class TestInstantiate:
    def test_one_item_list(self):
        rn = instantiate(parse_net("p~Lst(r), p~Cons(x,xs), x~One, xs~Nil"))
        assert len(rn.nodes) == 4
        assert rn.active_pairs() == [(0, 1)]
        assert rn.interface() == {"r"}
        rn.check_ports()

    def test_empty(self):
        rn = instantiate(parse_net(""))
        assert rn.nodes == {}
        assert rn.links == {}

    def test_pure_wire(self):
        rn = instantiate(parse_net("x~y"))
        assert rn.nodes == {}
        assert rn.interface() == {"x", "y"}

    def test_closed_loop_vanishes(self):
        rn = instantiate(parse_net("x~x"))
        assert rn.nodes == {} and rn.links == {}

    def test_cyclic_term(self):
        rn = instantiate(parse_net("x~Cons(x,y)"))
        assert len(rn.nodes) == 1
        rn.check_ports()


class TestApplyRule:
    def test_first_step_creates_auxiliary_pair(self):
        prog, rules = _lastelt_rules()
        rn = instantiate(parse_net("p~Lst(r), p~Cons(x,xs), x~One, xs~Nil"))
        new_pairs = apply_rule(rn, rn.active_pairs()[0], rules[0])
        assert len(new_pairs) == 1
        names = {rn.nodes[n].name for n in new_pairs[0]}
        assert names == {"Lst_Cons", "Nil"}
        rn.check_ports()

    def test_second_step_reaches_interface(self):
        prog, rules = _lastelt_rules()
        rn = instantiate(parse_net("p~Lst(r), p~Cons(x,xs), x~One, xs~Nil"))
        pair1 = rn.active_pairs()[0]
        (pair2,) = apply_rule(rn, pair1, rules[0])
        by_pair = {r.lhs.unordered_roots(): r for r in rules}
        apply_rule(rn, pair2, by_pair[frozenset({"Lst_Cons", "Nil"})])
        assert format_net(readback(rn)) == "r~One"

    def test_wire_only_right_side_joins_interfaces(self):
        prog = parse_program("A(x) >< B(y) => x~y\nnet A(u)~B(v)")
        rn = instantiate(prog.initial_net)
        apply_rule(rn, (0, 1), prog.rules[0])
        assert format_net(readback(rn)) == "u~v"

    def test_mismatch_raises(self):
        prog = parse_program("Lst(r) >< Cons(x,Nil) => r~x\nnet Lst(r)~Cons(One,Cons(Two,Nil))")
        rn = instantiate(prog.initial_net)
        with pytest.raises(MatchFailure):
            apply_rule(rn, rn.active_pairs()[0], prog.rules[0])


class TestReduce:
    @pytest.mark.parametrize("strategy,seed", ALL_STRATEGIES)
    def test_one_item_list_two_steps(self, strategy, seed):
        # Hand reduction: Lst/Cons dispatch, then Lst_Cons/Nil.
        prog, rules = _lastelt_rules()
        net = parse_program(LASTELT_NESTED + ERASE_RULES + ONE_ITEM_NET).initial_net
        rn, trace = reduce(instantiate(net), rules, strategy=strategy, seed=seed, debug_checks=True)
        assert trace.final_line() == "normal form: r~One"
        assert len(trace.steps) == 2

    @pytest.mark.parametrize("strategy,seed", ALL_STRATEGIES)
    def test_two_item_list_five_steps(self, strategy, seed):
        # Hand reduction: Lst/Cons, Lst_Cons/Cons, then Eps/One, Lst/Cons,
        # Lst_Cons/Nil in some order; five applications in every order.
        prog, rules = _lastelt_rules()
        net = parse_program(LASTELT_NESTED + ERASE_RULES + TWO_ITEM_NET).initial_net
        rn, trace = reduce(instantiate(net), rules, strategy=strategy, seed=seed, debug_checks=True)
        assert trace.final_line() == "normal form: r~Two"
        assert len(trace.steps) == 5

    def test_no_active_pairs_unchanged(self):
        prog, rules = _lastelt_rules()
        net = parse_net("r~Cons(x,xs), x~One, xs~Nil")
        rn, trace = reduce(instantiate(net), rules)
        assert trace.steps == []
        assert net_alpha_equivalent(readback(rn), net)

    def test_pair_without_rule_blocks(self):
        prog = parse_program("Eps >< One\nnet Nil~Cons(x,xs), x~One, xs~Nil")
        rn, trace = reduce(instantiate(prog.initial_net), prog.rules)
        assert trace.steps == []
        assert trace.blocked_pairs == 1
        assert trace.final_line() == "blocked pairs: 1"

    def test_step_limit(self):
        prog = parse_program("Loop >< Go => Loop~Go\nnet Loop~Go")
        with pytest.raises(StepLimitExceeded):
            reduce(instantiate(prog.initial_net), prog.rules, max_steps=10)

    def test_interface_preserved(self):
        prog, rules = _lastelt_rules()
        net = parse_program(LASTELT_NESTED + ERASE_RULES + TWO_ITEM_NET).initial_net
        rn = instantiate(net)
        before = rn.interface()
        rn, _ = reduce(rn, rules, debug_checks=True)
        assert rn.interface() == before

    def test_trace_lines_format(self):
        prog, rules = _lastelt_rules()
        net = parse_program(LASTELT_NESTED + ERASE_RULES + ONE_ITEM_NET).initial_net
        _, trace = reduce(instantiate(net), rules)
        assert trace.lines() == [
            "step 1: r1 on Lst >< Cons",
            "step 2: r4 on Lst_Cons >< Nil",
            "normal form: r~One",
        ]


class TestDirectMode:
    def test_nested_match_consumes_whole_pattern(self):
        prog = parse_program(LASTELT_NESTED + ERASE_RULES + ONE_ITEM_NET)
        rn, trace = reduce(instantiate(prog.initial_net), prog.rules, mode="direct", debug_checks=True)
        assert trace.final_line() == "normal form: r~One"
        assert len(trace.steps) == 1

    def test_agrees_with_translated_mode(self):
        prog = parse_program(LASTELT_NESTED + ERASE_RULES + TWO_ITEM_NET)
        rules = translate_program(prog.rules, prog.symbols)
        direct, _ = reduce(instantiate(prog.initial_net), prog.rules, mode="direct")
        translated, _ = reduce(instantiate(prog.initial_net), rules, mode="orn")
        assert net_alpha_equivalent(readback(direct), readback(translated))

    def test_deferred_nested_match_direct_mode(self):
        # The nested position is filled only after another pair fires; the
        # parked pair must be retried and the match completed.
        prog = parse_program(
            "Lst(r) >< Cons(x,Nil) => r~x\n"
            "Mk(o) >< Go => o~Nil\n"
            "net Lst(r)~Cons(x,t), x~One, Mk(t)~Go\n"
        )
        rn, trace = reduce(instantiate(prog.initial_net), prog.rules, mode="direct", debug_checks=True)
        assert trace.final_line() == "normal form: r~One"
        assert len(trace.steps) == 2
        translated = translate_program(prog.rules, prog.symbols)
        rn2, trace2 = reduce(instantiate(prog.initial_net), translated, mode="orn")
        assert net_alpha_equivalent(readback(rn), readback(rn2))

    def test_partial_match_blocks_in_direct_mode(self):
        prog = parse_program(
            "Lst(r) >< Cons(x,Nil) => r~x\n"
            "net Lst(r)~Cons(One,Cons(Two,Nil))\n"
        )
        rn, trace = reduce(instantiate(prog.initial_net), prog.rules, mode="direct")
        assert trace.steps == []
        assert trace.blocked_pairs == 1

    def test_orn_mode_rejects_nested_rules(self):
        prog = parse_program(LASTELT_NESTED)
        with pytest.raises(ValueError):
            reduce(instantiate(parse_net("")), prog.rules, mode="orn")


class TestReadback:
    def test_final_net_of_one_item_run(self):
        prog, rules = _lastelt_rules()
        net = parse_program(LASTELT_NESTED + ERASE_RULES + ONE_ITEM_NET).initial_net
        rn, _ = reduce(instantiate(net), rules)
        assert format_net(readback(rn)) == "r~One"

    def test_empty(self):
        assert readback(instantiate(parse_net(""))).equations == ()

    NETS = [
        "p~Lst(r), p~Cons(x,xs), x~One, xs~Nil",
        "Lst(r)~Cons(One,Cons(Two,Nil))",
        "x~y",
        "a~Dup(b,c), b~S(d), d~Z",
        "x~Cons(x,y)",
        "u~v, w~Cons(a,b), a~One, b~w2, w2~Nil",
    ]

    @pytest.mark.parametrize("text", NETS)
    def test_round_trip(self, text):
        net = parse_net(text)
        assert net_alpha_equivalent(readback(instantiate(net)), net)

    def test_canonical_net_keeps_interface_names(self):
        net = parse_net("p~Lst(r), p~Cons(x,xs), x~One, xs~Nil")
        text = canonical_net(readback(instantiate(net)))
        assert "r" in text
        again = parse_net(text)
        assert net_alpha_equivalent(again, net)


class TestNetEquivalence:
    def test_equation_order_and_flips_ignored(self):
        a = parse_net("p~Lst(r), p~Cons(x,xs), x~One, xs~Nil")
        a2 = parse_net("xs~Nil, Cons(x,xs)~p, One~x, p~Lst(r)")
        assert net_alpha_equivalent(a, a2)

    def test_wire_chains_contract(self):
        a = parse_net("x~y, y~Lst(r), x~Cons(u,v), u~One, v~Nil")
        b = parse_net("Lst(r)~Cons(One,Nil)")
        assert net_alpha_equivalent(a, b)

    def test_interface_names_matter(self):
        assert not net_alpha_equivalent(parse_net("r~One"), parse_net("q~One"))

    def test_structure_matters(self):
        assert not net_alpha_equivalent(
            parse_net("r~Cons(One,Nil)"), parse_net("r~Cons(Nil,One)")
        )
