"""Well-formedness verification for rule sets.

Two conditions keep reduction strongly confluent in the presence of nested
patterns: no rule's left side may embed into another's (the subnet check),
and all nested left sides over the same active agents must fit into one
sequential set (checked by falsification over position sets).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .core import (
    Agent,
    Position,
    Rule,
    RulePattern,
    Term,
    Var,
    alpha_equivalent,
    pattern_key,
)
from .diagnostics import Diagnostic, WellFormednessError

PosSymSet = frozenset[tuple[Position, str]]


def _pos_sym_term(ps: Position, term: Term, keep_intermediate: bool) -> set[tuple[Position, str]]:
    if isinstance(term, Var):
        return set()
    if all(isinstance(a, Var) for a in term.args):
        return {(ps, term.symbol.name)}
    out: set[tuple[Position, str]] = set()
    if keep_intermediate:
        out.add((ps, term.symbol.name))
    for i, arg in enumerate(term.args, start=1):
        out |= _pos_sym_term(ps + (i,), arg, keep_intermediate)
    return out


def pos_sym(pattern: RulePattern) -> PosSymSet:
    """Positions of nested agents paired with their symbol names.

    An agent whose arguments are all variables is recorded at its own
    position; an agent with a nested child contributes only its children.
    """
    out: set[tuple[Position, str]] = set()
    for root_idx, root in ((1, pattern.left), (2, pattern.right)):
        for i, arg in enumerate(root.args, start=1):
            out |= _pos_sym_term((root_idx, i), arg, keep_intermediate=False)
    return frozenset(out)


def pos(pattern: RulePattern) -> frozenset[Position]:
    return frozenset(p for p, _ in pos_sym(pattern))


def pos_sym_full(pattern: RulePattern) -> PosSymSet:
    """Like pos_sym but also records agents that have nested children."""
    out: set[tuple[Position, str]] = set()
    for root_idx, root in ((1, pattern.left), (2, pattern.right)):
        for i, arg in enumerate(root.args, start=1):
            out |= _pos_sym_term((root_idx, i), arg, keep_intermediate=True)
    return frozenset(out)


def pos_full(pattern: RulePattern) -> frozenset[Position]:
    return frozenset(p for p, _ in pos_sym_full(pattern))


# Subnet check ---------------------------------------------------------------


def _embeds(p: Term, q: Term) -> bool:
    """p embeds in q: q is p with zero or more variable leaves replaced."""
    if isinstance(p, Var):
        return True
    if not isinstance(q, Agent) or p.symbol != q.symbol:
        return False
    return all(_embeds(a, b) for a, b in zip(p.args, q.args))


def is_subnet(p: RulePattern, q: RulePattern) -> bool:
    """True when q can be obtained from p by substituting agents for variables.

    Variable names are ignored and the active pair is treated as unordered.
    """
    if _embeds(p.left, q.left) and _embeds(p.right, q.right):
        return True
    return _embeds(p.left, q.right) and _embeds(p.right, q.left)


# Sequential-set check -------------------------------------------------------


def _alignments(p: RulePattern, q: RulePattern) -> list[RulePattern]:
    """Orientations of q whose root symbols line up with p's."""
    out = []
    if (p.left.symbol, p.right.symbol) == (q.left.symbol, q.right.symbol):
        out.append(q)
    flipped = q.flipped()
    if (p.left.symbol, p.right.symbol) == (flipped.left.symbol, flipped.right.symbol):
        out.append(flipped)
    return out


def _compatible_aligned(p: RulePattern, q: RulePattern, full: bool) -> bool:
    sym = pos_sym_full if full else pos_sym
    sp, sq = dict(sym(p)), dict(sym(q))
    pp, pq = set(sp), set(sq)
    if pp <= pq or pq <= pp:
        return True
    common = pp & pq
    if all(sp[c] == sq[c] for c in common):
        return False
    return True


def sequential_compatible(p: RulePattern, q: RulePattern, full: bool = False) -> bool:
    """Can p and q belong to one sequential set of nested active pairs?

    Only pairs over the same active agents constrain each other; others are
    trivially compatible.  With aligned roots: if one position set contains
    the other the pair is fine; otherwise the pair is rejected exactly when
    the recorded agents agree at every common position.
    """
    alignments = _alignments(p, q)
    if not alignments:
        return True
    return any(_compatible_aligned(p, q2, full) for q2 in alignments)


# Rule-set verification ------------------------------------------------------


@dataclass
class CheckStores:
    """Previously accepted left sides: all of them (U) and the nested ones (S)."""

    all_patterns: list[tuple[RulePattern, Rule]] = field(default_factory=list)
    nested_patterns: list[tuple[RulePattern, Rule]] = field(default_factory=list)

    def add(self, pattern: RulePattern, rule: Rule):
        self.all_patterns.append((pattern, rule))
        if pattern.is_inp():
            self.nested_patterns.append((pattern, rule))

    def peak_population(self) -> int:
        return len(self.all_patterns) + len(self.nested_patterns)


def check_rule_against_stores(rule: Rule, stores: CheckStores) -> list[Diagnostic]:
    """Diagnostics for admitting one more rule; empty means acceptable."""
    pattern = rule.lhs
    orn = pattern.is_orn()
    diags: list[Diagnostic] = []
    for prev_pat, prev_rule in stores.all_patterns:
        if pattern.unordered_roots() != prev_pat.unordered_roots():
            continue
        prev_orn = prev_pat.is_orn()
        if orn and prev_orn:
            diags.append(
                Diagnostic(
                    "error",
                    "DUPLICATE",
                    f"rules {prev_rule.name} and {rule.name} both act on the active pair "
                    f"{prev_pat.left.symbol.name} >< {prev_pat.right.symbol.name}",
                    rule.span,
                    prev_rule.span,
                    f"previous rule {prev_rule.name}",
                )
            )
            continue
        if orn:
            violated = is_subnet(pattern, prev_pat)
        else:
            violated = is_subnet(pattern, prev_pat) or is_subnet(prev_pat, pattern)
        if violated:
            diags.append(
                Diagnostic(
                    "error",
                    "SUBNET",
                    f"left side of {rule.name} overlaps with {prev_rule.name}: "
                    "one pattern embeds into the other",
                    rule.span,
                    prev_rule.span,
                    f"conflicting rule {prev_rule.name}",
                )
            )
    if not orn:
        for prev_pat, prev_rule in stores.nested_patterns:
            if sequential_compatible(pattern, prev_pat):
                continue
            diags.append(
                Diagnostic(
                    "error",
                    "SEQUENTIAL",
                    f"patterns of {rule.name} and {prev_rule.name} cannot belong to "
                    "one sequential set: they match at incomparable positions",
                    rule.span,
                    prev_rule.span,
                    f"conflicting rule {prev_rule.name}",
                )
            )
            if sequential_compatible(pattern, prev_pat, full=True):
                diags.append(
                    Diagnostic(
                        "warning",
                        "SEQUENTIAL",
                        "this rejection is conservative: positions of agents that "
                        "carry deeper nesting are not tracked, so the patterns may "
                        "be compatible after all",
                        rule.span,
                        prev_rule.span,
                        f"paired with rule {prev_rule.name}",
                    )
                )
    return diags


def verify_well_formed(rules: Iterable[Rule]) -> list[Diagnostic]:
    """Check a whole rule set in order; returns all diagnostics found.

    A rule that fails a check is still added to the stores so later rules
    are reported against the full set.
    """
    stores = CheckStores()
    diags: list[Diagnostic] = []
    for rule in rules:
        diags.extend(check_rule_against_stores(rule, stores))
        stores.add(rule.lhs, rule)
    return diags


def assert_well_formed(rules: Iterable[Rule]) -> None:
    diags = verify_well_formed(rules)
    errors = [d for d in diags if d.severity == "error"]
    if errors:
        raise WellFormednessError(diags)


# Brute-force oracles (small instances) --------------------------------------


def _prunings(term: Term) -> set:
    """All erasure keys reachable by pruning agent subtrees to variables."""
    if isinstance(term, Var):
        return {None}
    options = [_prunings(a) | {None} if isinstance(a, Agent) else {None} for a in term.args]
    out = {None}
    import itertools

    for combo in itertools.product(*options):
        out.add((term.symbol.name, term.symbol.arity, combo))
    return out


def brute_force_subnet(p: RulePattern, q: RulePattern) -> bool:
    """Oracle for is_subnet: enumerate every pruning of q and compare shapes."""
    target = pattern_key(p)
    for left_key in _prunings(q.left):
        for right_key in _prunings(q.right):
            if left_key is None or right_key is None:
                continue
            if (left_key, right_key) == target or (right_key, left_key) == target:
                return True
    return False


def _meet(a: Term, b: Term) -> Optional[Term]:
    """Greatest common pruning of two terms; None when their agents clash."""
    if isinstance(a, Var) or isinstance(b, Var):
        return Var("_")
    if a.symbol != b.symbol:
        return None
    args = []
    for x, y in zip(a.args, b.args):
        m = _meet(x, y)
        if m is None:
            return None
        args.append(m)
    return Agent(a.symbol, tuple(args))


def _extension_positions(pattern: RulePattern, meet: RulePattern) -> set[Position]:
    """Positions where the pattern has an agent but the meet has a variable."""
    out: set[Position] = set()

    def walk(t: Term, m: Term, at: Position):
        if isinstance(m, Var):
            if isinstance(t, Agent):
                out.add(at)
            return
        assert isinstance(t, Agent)
        for i, (x, y) in enumerate(zip(t.args, m.args), start=1):
            walk(x, y, at + (i,))

    walk(pattern.left, meet.left, (1,))
    walk(pattern.right, meet.right, (2,))
    return out


def brute_force_sequential(p: RulePattern, q: RulePattern) -> bool:
    """Oracle for sequential compatibility via the common-prefix shape.

    Two patterns are jointly unsatisfiable for a sequential set exactly when
    they agree on their greatest common prefix yet each extends it at a
    position the other does not: a prefix M with extensions x != y.  When
    their agents clash somewhere, the patterns can never match the same
    redex and are compatible.  Agrees with the positional algorithm whenever
    every nested agent sits directly under the active pair; for deeper
    nesting the positional algorithm is more conservative.
    """
    verdicts = []
    for q2 in _alignments(p, q) or []:
        ml, mr = _meet(p.left, q2.left), _meet(p.right, q2.right)
        if ml is None or mr is None:
            verdicts.append(True)
            continue
        meet = RulePattern(ml, mr)
        ext_p = _extension_positions(p, meet)
        ext_q = _extension_positions(q2, meet)
        verdicts.append(not (ext_p and ext_q))
    if not verdicts:
        return True
    return any(verdicts)
