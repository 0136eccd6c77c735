"""Rewriting rules with nested patterns into ordinary interaction rules.

Each pass resolves one nested agent: the rule's left side is generalised by
replacing every nested agent with a fresh variable, an auxiliary agent takes
over the remaining ports, and an auxiliary rule carrying the rest of the
match obligations (and eventually the original right side) is queued for
further processing.  Auxiliary agents are shared between rules that
generalise to the same context, which is what makes the generated rule set
collapse into a decision tree.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .core import (
    Agent,
    AgentSymbol,
    Equation,
    Net,
    Position,
    Rule,
    RulePattern,
    Term,
    Var,
    agent_positions,
    lhs_alpha_equivalent,
    nested_agent_count,
    pattern_vars,
    rule_alpha_equivalent,
    subterm_at,
    term_vars,
)
from .check import CheckStores, check_rule_against_stores
from .diagnostics import ConflictingRulesError, Diagnostic, NotNested, WellFormednessError


def first_nested_position(pattern: RulePattern) -> Position:
    """Lexicographically least position holding an agent.

    Prefixes order before their extensions, so this is always the outermost
    nested agent on the least path (a direct argument of one of the roots).
    """
    positions = agent_positions(pattern)
    if not positions:
        raise NotNested(f"pattern {pattern.root_names()} has no nested agent")
    return positions[0]


@dataclass
class TranslationStats:
    steps: int = 0
    measure_trace: list[int] = field(default_factory=list)
    peak_store_population: int = 0


@dataclass
class TranslationState:
    pending: deque[Rule]
    output: list[Rule] = field(default_factory=list)
    stores: CheckStores = field(default_factory=CheckStores)
    fresh_counter: int = 0
    aux_agents: dict = field(default_factory=dict)  # (left, right, position) -> AgentSymbol
    symbols: dict[str, AgentSymbol] = field(default_factory=dict)
    orientation: dict[frozenset, tuple[str, str]] = field(default_factory=dict)
    stats: TranslationStats = field(default_factory=TranslationStats)

    def measure(self) -> int:
        """Pending rule count plus nested agents over pending rules."""
        return len(self.pending) + sum(nested_agent_count(r.lhs) for r in self.pending)

    def fresh_var(self, avoid: set[str]) -> str:
        while True:
            name = f"var{self.fresh_counter}"
            self.fresh_counter += 1
            if name not in avoid:
                return name

    def aux_symbol(self, key, left: AgentSymbol, right: AgentSymbol, arity: int) -> AgentSymbol:
        sym = self.aux_agents.get(key)
        if sym is not None:
            return sym
        base = f"{left.name}_{right.name}"
        name = base
        k = 0
        while name in self.symbols:
            k += 1
            name = f"{base}_{k}"
        sym = AgentSymbol(name, arity)
        self.symbols[name] = sym
        self.aux_agents[key] = sym
        return sym


def _orient(rule: Rule, state: TranslationState) -> Rule:
    """Normalise the active-pair orientation to the first one seen per pair."""
    roots = rule.lhs.unordered_roots()
    ordered = rule.lhs.root_names()
    chosen = state.orientation.setdefault(roots, ordered)
    if ordered == chosen:
        return rule
    return Rule(rule.lhs.flipped(), rule.rhs, rule.name, rule.span)


def translate_step(rule: Rule, state: TranslationState) -> None:
    """Process one pending rule: pass ordinary rules through, split nested ones."""
    rule = _orient(rule, state)
    diags = check_rule_against_stores(rule, state.stores)
    errors = [d for d in diags if d.severity == "error"]
    if errors:
        raise WellFormednessError(diags)

    pattern = rule.lhs
    if pattern.is_orn():
        state.output.append(rule)
        state.stores.add(pattern, rule)
        return

    target = first_nested_position(pattern)
    used = set(pattern_vars(pattern))

    # Generalise: every nested agent argument becomes a fresh variable.
    position_var: dict[Position, str] = {}

    def generalise(root: Agent, root_idx: int) -> Agent:
        args: list[Term] = []
        for i, arg in enumerate(root.args, start=1):
            if isinstance(arg, Agent):
                v = state.fresh_var(used)
                used.add(v)
                position_var[(root_idx, i)] = v
                args.append(Var(v))
            else:
                args.append(arg)
        return Agent(root.symbol, tuple(args))

    gen_left = generalise(pattern.left, 1)
    gen_right = generalise(pattern.right, 2)
    generalised = RulePattern(gen_left, gen_right)

    target_var = position_var[target]
    port_names = [v for v in pattern_vars(generalised) if v != target_var]
    aux_key = (
        pattern.left.symbol,
        pattern.right.symbol,
        target,
    )
    aux = state.aux_symbol(aux_key, pattern.left.symbol, pattern.right.symbol, len(port_names))

    dispatch = Rule(
        generalised,
        Net((Equation(Agent(aux, tuple(Var(v) for v in port_names)), Var(target_var)),)),
        name=rule.name,
        span=rule.span,
    )
    state.output.append(dispatch)

    # The auxiliary rule reattaches the resolved agent; nested agents at the
    # other positions ride along as the auxiliary agent's arguments.
    back = {v: p for p, v in position_var.items()}
    aux_args = tuple(
        subterm_at(pattern, back[v]) if v in back else Var(v) for v in port_names
    )
    continuation = Rule(
        RulePattern(Agent(aux, aux_args), subterm_at(pattern, target)),
        rule.rhs,
        name=f"{rule.name}'",
        span=rule.span,
    )
    state.pending.append(continuation)
    state.stores.add(pattern, rule)


def _dedup(output: list[Rule]) -> list[Rule]:
    kept: list[Rule] = []
    conflicts: list[Diagnostic] = []
    for rule in output:
        duplicate = False
        for prev in kept:
            if rule_alpha_equivalent(prev, rule):
                duplicate = True
                break
            if lhs_alpha_equivalent(prev.lhs, rule.lhs):
                conflicts.append(
                    Diagnostic(
                        "error",
                        "CONFLICT",
                        f"rules {prev.name} and {rule.name} share a left side but "
                        "rewrite to different nets",
                        rule.span,
                        prev.span,
                        f"conflicting rule {prev.name}",
                    )
                )
        if not duplicate:
            kept.append(rule)
    if conflicts:
        raise ConflictingRulesError(conflicts)
    return kept


@dataclass
class TranslationResult:
    rules: list[Rule]
    stats: TranslationStats


def run_translation(
    rules: Iterable[Rule], symbols: Optional[dict[str, AgentSymbol]] = None
) -> TranslationResult:
    """Drive the translation to a fixpoint and deduplicate the output."""
    state = TranslationState(pending=deque(rules))
    if symbols:
        state.symbols.update(symbols)

    def collect(term: Term):
        if isinstance(term, Agent):
            state.symbols.setdefault(term.symbol.name, term.symbol)
            for arg in term.args:
                collect(arg)

    for rule in state.pending:
        collect(rule.lhs.left)
        collect(rule.lhs.right)
        for eq in rule.rhs.equations:
            collect(eq.left)
            collect(eq.right)

    measure = state.measure()
    state.stats.measure_trace.append(measure)
    while state.pending:
        rule = state.pending.popleft()
        translate_step(rule, state)
        new_measure = state.measure()
        # Strict decrease of (pending rules + pending nested agents) is the
        # termination argument; a violation is a bug, not an input error.
        assert new_measure < measure, f"translation measure did not decrease: {measure} -> {new_measure}"
        state.stats.measure_trace.append(new_measure)
        measure = new_measure
        state.stats.steps += 1
        state.stats.peak_store_population = max(
            state.stats.peak_store_population, state.stores.peak_population()
        )

    deduped = _dedup(state.output)
    renumbered = [
        Rule(r.lhs, r.rhs, name=f"r{i}", span=r.span) for i, r in enumerate(deduped, start=1)
    ]
    return TranslationResult(renumbered, state.stats)


def translate_program(
    rules: Iterable[Rule], symbols: Optional[dict[str, AgentSymbol]] = None
) -> list[Rule]:
    """Translate a rule list to ordinary rules only; raises on ill-formed input."""
    return run_translation(rules, symbols).rules
