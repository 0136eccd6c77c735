"""Lexer and parser for the .inet language.

Grammar (line oriented; ``//`` starts a comment):

    program   := (ruleDecl | agentDecl | netDecl)*
    ruleDecl  := pattern "><" pattern ( "=>" eqList? )?
    netDecl   := "net" eqList?
    agentDecl := "agent" NAME ":" INT
    eqList    := eq ("," eq)*
    eq        := term "~" term
    term      := VAR | NAME ( "(" term ("," term)* ")" )?

Agent names start with an uppercase letter, variables with a lowercase one.
Agent arities are inferred from first use unless declared explicitly.

Two desugarings happen here.  Nested agent arguments in nets and rule right
sides are flattened out with fresh wire variables.  A rule without ``=>`` is
the simplified form of an optimised ordinary rule: nested agents on its left
side are folded out into right-side equations, and a repeated left-side
variable becomes a right-side wire.  Nested agents on the left of a rule
*with* ``=>`` are a genuine nested pattern and are kept.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .core import Agent, AgentSymbol, Equation, Net, Rule, RulePattern, Term, Var, pattern_vars, term_vars, variable_occurrences
from .diagnostics import ArityError, Diagnostic, LinearityError, ParseError, SourceSpan

KEYWORDS = ("net", "agent")

_FRESH_PREFIX = "%"  # not lexable, so desugaring wires can never collide with user names


@dataclass
class Token:
    kind: str  # AGENT VAR INT LPAREN RPAREN COMMA TILDE PAIR ARROW COLON KW NEWLINE EOF
    text: str
    span: SourceSpan


@dataclass
class Program:
    rules: list[Rule]
    initial_net: Optional[Net]
    symbols: dict[str, AgentSymbol]
    net_span: Optional[SourceSpan] = None


def _err(message: str, span: SourceSpan | None) -> ParseError:
    return ParseError(Diagnostic("error", "SYNTAX", message, span))


class Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def _span(self, line, col) -> SourceSpan:
        return SourceSpan(line, col, self.line, self.col)

    def _advance(self, n: int = 1):
        for _ in range(n):
            if self.pos < len(self.text) and self.text[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def tokens(self) -> list[Token]:
        out: list[Token] = []
        text = self.text
        while self.pos < len(text):
            ch = text[self.pos]
            line, col = self.line, self.col
            if ch == "\n":
                self._advance()
                out.append(Token("NEWLINE", "\n", self._span(line, col)))
                continue
            if ch in " \t\r":
                self._advance()
                continue
            if ch == "/" and text[self.pos : self.pos + 2] == "//":
                while self.pos < len(text) and text[self.pos] != "\n":
                    self._advance()
                continue
            if ch.isalpha():
                start = self.pos
                while self.pos < len(text) and (text[self.pos].isalnum() or text[self.pos] == "_"):
                    self._advance()
                word = text[start : self.pos]
                span = self._span(line, col)
                if word in KEYWORDS:
                    out.append(Token("KW", word, span))
                elif word[0].isupper():
                    out.append(Token("AGENT", word, span))
                else:
                    out.append(Token("VAR", word, span))
                continue
            if ch.isdigit():
                start = self.pos
                while self.pos < len(text) and text[self.pos].isdigit():
                    self._advance()
                out.append(Token("INT", text[start : self.pos], self._span(line, col)))
                continue
            if ch == "(":
                self._advance()
                out.append(Token("LPAREN", "(", self._span(line, col)))
                continue
            if ch == ")":
                self._advance()
                out.append(Token("RPAREN", ")", self._span(line, col)))
                continue
            if ch == ",":
                self._advance()
                out.append(Token("COMMA", ",", self._span(line, col)))
                continue
            if ch == "~":
                self._advance()
                out.append(Token("TILDE", "~", self._span(line, col)))
                continue
            if ch == ":":
                self._advance()
                out.append(Token("COLON", ":", self._span(line, col)))
                continue
            if ch == ">":
                self._advance()
                if self.pos < len(text) and text[self.pos] == "<":
                    self._advance()
                    out.append(Token("PAIR", "><", self._span(line, col)))
                    continue
                raise _err("expected '><'", self._span(line, col))
            if ch == "=":
                self._advance()
                if self.pos < len(text) and text[self.pos] == ">":
                    self._advance()
                    out.append(Token("ARROW", "=>", self._span(line, col)))
                    continue
                raise _err("expected '=>'", self._span(line, col))
            if ch in "\"'":
                raise _err("string literals are not supported", self._span(line, col))
            if ch == "_":
                raise _err("names must start with a letter", self._span(line, col))
            raise _err(f"unexpected character {ch!r}", self._span(line, col))
        out.append(Token("EOF", "", self._span(self.line, self.col)))
        return out


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.idx = 0
        self.symbols: dict[str, AgentSymbol] = {}
        self.declared: set[str] = set()
        self._fresh = 0

    # token helpers ---------------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.idx]

    def next(self) -> Token:
        tok = self.tokens[self.idx]
        self.idx += 1
        return tok

    def expect(self, kind: str, what: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise _err(f"expected {what}, found {tok.text!r}" if tok.text else f"expected {what}", tok.span)
        return self.next()

    def skip_newlines(self):
        while self.peek().kind == "NEWLINE":
            self.next()

    def at_line_end(self) -> bool:
        return self.peek().kind in ("NEWLINE", "EOF")

    def end_line(self):
        tok = self.peek()
        if tok.kind == "NEWLINE":
            self.next()
        elif tok.kind != "EOF":
            raise _err(f"unexpected {tok.text!r} at end of declaration", tok.span)

    def fresh_var(self) -> str:
        name = f"{_FRESH_PREFIX}{self._fresh}"
        self._fresh += 1
        return name

    # symbols ---------------------------------------------------------------

    def lookup_symbol(self, name: str, arity: int, span: SourceSpan) -> AgentSymbol:
        sym = self.symbols.get(name)
        if sym is None:
            sym = AgentSymbol(name, arity)
            self.symbols[name] = sym
            return sym
        if sym.arity != arity:
            raise ArityError(name, sym.arity, arity, span)
        return sym

    # grammar ---------------------------------------------------------------

    def parse_term(self) -> Term:
        tok = self.peek()
        if tok.kind == "VAR":
            self.next()
            return Var(tok.text)
        if tok.kind == "INT":
            raise _err(
                "numeric literals are not supported; model numbers as zero-arity agents (e.g. 'One')",
                tok.span,
            )
        if tok.kind == "AGENT":
            self.next()
            args: list[Term] = []
            if self.peek().kind == "LPAREN":
                self.next()
                args.append(self.parse_term())
                while self.peek().kind == "COMMA":
                    self.next()
                    args.append(self.parse_term())
                self.expect("RPAREN", "')'")
            sym = self.lookup_symbol(tok.text, len(args), tok.span)
            return Agent(sym, tuple(args))
        raise _err(f"expected a term, found {tok.text!r}" if tok.text else "expected a term", tok.span)

    def parse_equation(self) -> Equation:
        left = self.parse_term()
        self.expect("TILDE", "'~'")
        right = self.parse_term()
        return Equation(left, right)

    def parse_eq_list(self) -> list[Equation]:
        if self.at_line_end():
            return []
        eqs = [self.parse_equation()]
        while self.peek().kind == "COMMA":
            self.next()
            eqs.append(self.parse_equation())
        return eqs

    # desugaring ------------------------------------------------------------

    def flatten_term(self, term: Term, extra: list[Equation]) -> Term:
        """Replace nested agent arguments with fresh wires, keeping the root."""
        if isinstance(term, Var):
            return term
        new_args: list[Term] = []
        pending: list[tuple[str, Term]] = []
        for arg in term.args:
            if isinstance(arg, Var):
                new_args.append(arg)
            else:
                wire = self.fresh_var()
                new_args.append(Var(wire))
                pending.append((wire, arg))
        for wire, sub in pending:
            extra.append(Equation(Var(wire), self.flatten_term(sub, extra)))
        return Agent(term.symbol, tuple(new_args))

    def flatten_equations(self, eqs: list[Equation]) -> list[Equation]:
        out: list[Equation] = []
        for eq in eqs:
            extra: list[Equation] = []
            left = self.flatten_term(eq.left, extra)
            right = self.flatten_term(eq.right, extra)
            out.append(Equation(left, right))
            out.extend(extra)
        return out

    # declarations ----------------------------------------------------------

    def parse_agent_decl(self):
        self.next()  # 'agent'
        name = self.expect("AGENT", "an agent name")
        self.expect("COLON", "':'")
        arity_tok = self.expect("INT", "an arity")
        arity = int(arity_tok.text)
        existing = self.symbols.get(name.text)
        if existing is not None and existing.arity != arity:
            raise ArityError(name.text, existing.arity, arity, name.span)
        if name.text in self.declared:
            raise _err(f"agent '{name.text}' declared twice", name.span)
        self.symbols[name.text] = AgentSymbol(name.text, arity)
        self.declared.add(name.text)
        self.end_line()

    def parse_net_decl(self) -> tuple[Net, SourceSpan]:
        kw = self.next()  # 'net'
        eqs = self.flatten_equations(self.parse_eq_list())
        self.end_line()
        net = Net(tuple(eqs))
        self._check_net_linearity(net, kw.span)
        return net, kw.span

    def _check_net_linearity(self, net: Net, span: SourceSpan):
        for name, n in variable_occurrences(net).items():
            if n > 2:
                raise LinearityError(name, n, span)

    def parse_rule(self, number: int) -> Rule:
        start = self.peek().span
        left = self.parse_term()
        if not isinstance(left, Agent):
            raise _err("left of '><' must be an agent", start)
        self.expect("PAIR", "'><'")
        right_tok = self.peek()
        right = self.parse_term()
        if not isinstance(right, Agent):
            raise _err("right of '><' must be an agent", right_tok.span)
        explicit = self.peek().kind == "ARROW"
        rhs_eqs: list[Equation] = []
        if explicit:
            self.next()
            rhs_eqs = self.parse_eq_list()
        end = self.tokens[self.idx - 1].span
        self.end_line()
        span = start.merge(end)

        if explicit:
            pattern = RulePattern(left, right)
            self._check_pattern_linear(pattern, span)
        else:
            pattern, rhs_eqs = self._desugar_simplified(left, right, span)
        rhs = Net(tuple(self.flatten_equations(rhs_eqs)))
        rule = Rule(pattern, rhs, name=f"r{number}", span=span)
        self._check_rule_variables(rule)
        return rule

    def _check_pattern_linear(self, pattern: RulePattern, span: SourceSpan):
        for name, n in Counter(pattern_vars(pattern)).items():
            if n > 1:
                raise LinearityError(
                    name,
                    n,
                    span,
                    f"pattern variable '{name}' occurs {n} times; "
                    "a repeated variable is only allowed in a rule without '=>'",
                )

    def _desugar_simplified(
        self, left: Agent, right: Agent, span: SourceSpan
    ) -> tuple[RulePattern, list[Equation]]:
        """Unfold an optimised ordinary rule written without a right side."""
        rhs: list[Equation] = []

        def unfold(root: Agent) -> Agent:
            args: list[Term] = []
            for arg in root.args:
                if isinstance(arg, Agent):
                    wire = self.fresh_var()
                    args.append(Var(wire))
                    rhs.append(Equation(Var(wire), arg))
                else:
                    args.append(arg)
            return Agent(root.symbol, tuple(args))

        new_left, new_right = unfold(left), unfold(right)

        counts = Counter(
            name for t in (new_left, new_right) for name in term_vars(t)
        )
        for name, n in counts.items():
            if n > 2:
                raise LinearityError(name, n, span)
        repeated = [name for name, n in counts.items() if n == 2]

        def rewire(root: Agent) -> Agent:
            args: list[Term] = []
            for arg in root.args:
                if isinstance(arg, Var) and arg.name in pairs:
                    args.append(Var(pairs[arg.name].pop(0)))
                else:
                    args.append(arg)
            return Agent(root.symbol, tuple(args))

        pairs = {}
        for name in repeated:
            a, b = self.fresh_var(), self.fresh_var()
            pairs[name] = [a, b]
            rhs.append(Equation(Var(a), Var(b)))
        if pairs:
            new_left, new_right = rewire(new_left), rewire(new_right)
        return RulePattern(new_left, new_right), rhs

    def _check_rule_variables(self, rule: Rule):
        lhs_vars = pattern_vars(rule.lhs)
        rhs_counts = variable_occurrences(rule.rhs)
        for name in lhs_vars:
            n = rhs_counts.get(name, 0)
            if n == 0:
                raise LinearityError(
                    name,
                    1,
                    rule.span,
                    f"pattern port '{name}' is not used on the right side; free ports must be preserved",
                )
            if n > 1:
                raise LinearityError(name, n + 1, rule.span)
        for name, n in rhs_counts.items():
            if name in lhs_vars:
                continue
            if n == 1:
                raise LinearityError(
                    name,
                    1,
                    rule.span,
                    f"variable '{name}' occurs once on the right side but is not a pattern port",
                )
            if n > 2:
                raise LinearityError(name, n, rule.span)

    # entry points ----------------------------------------------------------

    def parse_program(self) -> Program:
        rules: list[Rule] = []
        net: Optional[Net] = None
        net_span: Optional[SourceSpan] = None
        while True:
            self.skip_newlines()
            tok = self.peek()
            if tok.kind == "EOF":
                break
            if tok.kind == "KW" and tok.text == "agent":
                self.parse_agent_decl()
            elif tok.kind == "KW" and tok.text == "net":
                if net is not None:
                    raise _err("a program may contain at most one 'net' declaration", tok.span)
                net, net_span = self.parse_net_decl()
            else:
                rules.append(self.parse_rule(len(rules) + 1))
        return Program(rules, net, dict(self.symbols), net_span)

    def parse_single_net(self) -> Net:
        # Standalone nets may span lines; newlines act as whitespace here.
        self.tokens = [t for t in self.tokens if t.kind != "NEWLINE"]
        eqs: list[Equation] = []
        if self.peek().kind != "EOF":
            eqs = self.parse_eq_list()
            tok = self.peek()
            if tok.kind != "EOF":
                raise _err(f"unexpected {tok.text!r} after net", tok.span)
        net = Net(tuple(self.flatten_equations(eqs)))
        self._check_net_linearity(net, SourceSpan(1, 1, 1, 1))
        return net


def parse_program(text: str) -> Program:
    return _Parser(Lexer(text).tokens()).parse_program()


def parse_net(text: str) -> Net:
    return _Parser(Lexer(text).tokens()).parse_single_net()
