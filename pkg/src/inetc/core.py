"""Core data model: agents, terms, equations, nets, rule patterns, positions.

Terms are immutable trees.  A net is an ordered list of equations ``t ~ s``
over terms; variable names occurring twice are wires, names occurring once
form the net's interface.  A rule pattern is an active pair of two agent
terms, possibly with further agents nested in argument positions.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from .diagnostics import LinearityError, SourceSpan


@dataclass(frozen=True)
class AgentSymbol:
    name: str
    arity: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Agent:
    symbol: AgentSymbol
    args: tuple["Term", ...] = ()

    def __post_init__(self):
        if len(self.args) != self.symbol.arity:
            raise ValueError(
                f"agent '{self.symbol.name}' takes {self.symbol.arity} argument(s), got {len(self.args)}"
            )


Term = Union[Var, Agent]


@dataclass(frozen=True)
class Equation:
    left: Term
    right: Term

    def is_active_pair(self) -> bool:
        return isinstance(self.left, Agent) and isinstance(self.right, Agent)


@dataclass(frozen=True)
class Net:
    equations: tuple[Equation, ...] = ()

    @property
    def interface(self) -> frozenset[str]:
        return frozenset(free_variables(self))


@dataclass(frozen=True)
class RulePattern:
    """A nested active pair: two agent roots joined at their principal ports."""

    left: Agent
    right: Agent

    def flipped(self) -> "RulePattern":
        return RulePattern(self.right, self.left)

    def root_names(self) -> tuple[str, str]:
        return (self.left.symbol.name, self.right.symbol.name)

    def unordered_roots(self) -> frozenset[str]:
        return frozenset(self.root_names())

    def is_orn(self) -> bool:
        """True when every argument at every depth is a variable."""
        return not agent_positions(self)

    def is_inp(self) -> bool:
        return not self.is_orn()


@dataclass
class Rule:
    lhs: RulePattern
    rhs: Net
    name: str = ""
    span: Optional[SourceSpan] = None


# Positions address subterms of a pattern: the first index selects the left
# (1) or right (2) root, the rest are 1-based argument indices.  Tuples give
# the lexicographic total order for free.
Position = tuple[int, ...]


def term_vars(term: Term) -> Iterator[str]:
    """Variable names of a term in left-to-right, depth-first order."""
    if isinstance(term, Var):
        yield term.name
    else:
        for arg in term.args:
            yield from term_vars(arg)


def pattern_vars(pattern: RulePattern) -> list[str]:
    return list(term_vars(pattern.left)) + list(term_vars(pattern.right))


def subterm_at(pattern: RulePattern, pos: Position) -> Term:
    root: Term = pattern.left if pos[0] == 1 else pattern.right
    for idx in pos[1:]:
        assert isinstance(root, Agent)
        root = root.args[idx - 1]
    return root


def agent_positions(pattern: RulePattern) -> list[Position]:
    """Positions (length >= 2) of every nested agent, in lexicographic order."""
    found: list[Position] = []

    def walk(term: Term, at: Position):
        if isinstance(term, Agent):
            if len(at) >= 2:
                found.append(at)
            for i, arg in enumerate(term.args, start=1):
                walk(arg, at + (i,))

    walk(pattern.left, (1,))
    walk(pattern.right, (2,))
    found.sort()
    return found


def nested_agent_count(pattern: RulePattern) -> int:
    return len(agent_positions(pattern))


def variable_occurrences(net: Net) -> Counter:
    counts: Counter = Counter()
    for eq in net.equations:
        counts.update(term_vars(eq.left))
        counts.update(term_vars(eq.right))
    return counts


def free_variables(net: Net) -> set[str]:
    """Names occurring exactly once; assumes the net is linear."""
    return {name for name, n in variable_occurrences(net).items() if n == 1}


def check_linearity(net: Net) -> None:
    """Raise LinearityError if any variable occurs three or more times."""
    for name, n in variable_occurrences(net).items():
        if n > 2:
            raise LinearityError(name, n)


def _erasure_key(term: Term):
    if isinstance(term, Var):
        return None
    return (term.symbol.name, term.symbol.arity, tuple(_erasure_key(a) for a in term.args))


def pattern_key(pattern: RulePattern):
    """Structure of a pattern with variable names erased."""
    return (_erasure_key(pattern.left), _erasure_key(pattern.right))


def alpha_equivalent(a: RulePattern, b: RulePattern) -> bool:
    """Identical trees after erasing variable names, position for position."""
    return pattern_key(a) == pattern_key(b)


def _match_vars(a: Term, b: Term, fwd: dict, bwd: dict) -> bool:
    if isinstance(a, Var) and isinstance(b, Var):
        if fwd.get(a.name, b.name) != b.name or bwd.get(b.name, a.name) != a.name:
            return False
        fwd[a.name] = b.name
        bwd[b.name] = a.name
        return True
    if isinstance(a, Agent) and isinstance(b, Agent):
        if a.symbol != b.symbol:
            return False
        return all(_match_vars(x, y, fwd, bwd) for x, y in zip(a.args, b.args))
    return False


def _rule_alpha_oriented(a: Rule, b_lhs: RulePattern, b_rhs: Net) -> bool:
    fwd: dict = {}
    bwd: dict = {}
    if not _match_vars(a.lhs.left, b_lhs.left, fwd, bwd):
        return False
    if not _match_vars(a.lhs.right, b_lhs.right, fwd, bwd):
        return False
    if len(a.rhs.equations) != len(b_rhs.equations):
        return False
    for ea, eb in zip(a.rhs.equations, b_rhs.equations):
        if not _match_vars(ea.left, eb.left, fwd, bwd):
            return False
        if not _match_vars(ea.right, eb.right, fwd, bwd):
            return False
    return True


def rule_alpha_equivalent(a: Rule, b: Rule) -> bool:
    """Whole-rule equivalence under a consistent renaming of variables.

    The right sides are compared equation by equation in stored order; the
    left side of ``b`` may be flipped, since an active pair is unordered.
    """
    return _rule_alpha_oriented(a, b.lhs, b.rhs) or _rule_alpha_oriented(
        a, b.lhs.flipped(), b.rhs
    )


def lhs_alpha_equivalent(a: RulePattern, b: RulePattern) -> bool:
    """Pattern equivalence up to renaming and active-pair orientation."""
    return alpha_equivalent(a, b) or alpha_equivalent(a, b.flipped())


def rule_variable_counts(rule: Rule) -> Counter:
    counts = Counter(pattern_vars(rule.lhs))
    counts.update(variable_occurrences(rule.rhs))
    return counts
