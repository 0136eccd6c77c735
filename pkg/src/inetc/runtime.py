"""Graph runtime: instantiation, rule application, reduction, readback.

A runtime net is an arena of agent nodes plus a symmetric link table over
port endpoints.  Endpoints are ``('p', node, index)`` with index 0 the
principal port, or ``('f', name)`` for a named interface port.  Every port
is linked to exactly one other endpoint.

Rewiring during instantiation and rule application goes through a small
union-find: variables and the ports of consumed agents act as connectors
between real endpoints, and every connector chain resolves to either one new
link (two real ends) or nothing (a fully consumed chain or closed loop).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .core import (
    Agent,
    AgentSymbol,
    Equation,
    Net,
    Rule,
    RulePattern,
    Term,
    Var,
    variable_occurrences,
)
from .diagnostics import MatchFailure, StepLimitExceeded
from .printer import canonical_net

End = tuple

DEFAULT_MAX_STEPS = 1_000_000


class _Wiring:
    """Union-find over endpoints; connectors join, real endpoints terminate."""

    def __init__(self):
        self.parent: dict[End, End] = {}
        self.order: list[End] = []

    def _add(self, e: End):
        if e not in self.parent:
            self.parent[e] = e
            self.order.append(e)

    def find(self, e: End) -> End:
        self._add(e)
        root = e
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[e] != root:
            self.parent[e], e = root, self.parent[e]
        return root

    def union(self, a: End, b: End):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra

    @staticmethod
    def is_real(e: End) -> bool:
        return e[0] in ("p", "f")

    def resolve(self) -> list[tuple[End, End]]:
        groups: dict[End, list[End]] = {}
        for e in self.order:
            if self.is_real(e):
                groups.setdefault(self.find(e), []).append(e)
        links = []
        for root in {self.find(e) for e in self.order}:
            reals = groups.get(root, [])
            if len(reals) == 2:
                links.append((reals[0], reals[1]))
            elif len(reals) != 0:
                raise AssertionError(f"wiring class with {len(reals)} loose end(s): {reals}")
        links.sort()
        return links


class RuntimeNet:
    def __init__(self):
        self.nodes: dict[int, AgentSymbol] = {}
        self.links: dict[End, End] = {}
        self._next_id = 0

    def add_node(self, symbol: AgentSymbol) -> int:
        nid = self._next_id
        self._next_id += 1
        self.nodes[nid] = symbol
        return nid

    def link(self, a: End, b: End):
        self.links[a] = b
        self.links[b] = a

    def interface(self) -> set[str]:
        return {e[1] for e in self.links if e[0] == "f"}

    def active_pairs(self) -> list[tuple[int, int]]:
        pairs = []
        for nid in sorted(self.nodes):
            peer = self.links.get(("p", nid, 0))
            if peer is not None and peer[0] == "p" and peer[2] == 0 and peer[1] > nid:
                pairs.append((nid, peer[1]))
        return pairs

    def check_ports(self):
        """Debug sweep: every port of every node has exactly one symmetric link."""
        for nid, sym in self.nodes.items():
            for idx in range(sym.arity + 1):
                port = ("p", nid, idx)
                peer = self.links.get(port)
                assert peer is not None, f"unlinked port {port}"
                assert self.links.get(peer) == port, f"asymmetric link at {port}"
        for end, peer in self.links.items():
            if end[0] == "p":
                assert end[1] in self.nodes, f"link to removed node {end}"
                assert end[2] <= self.nodes[end[1]].arity, f"bad port index {end}"


def _build_term(rn: RuntimeNet, wiring: _Wiring, term: Term, var_end) -> End:
    """Create nodes for a term; returns the endpoint of its root."""
    if isinstance(term, Var):
        return var_end(term.name)
    nid = rn.add_node(term.symbol)
    for i, arg in enumerate(term.args, start=1):
        wiring.union(("p", nid, i), _build_term(rn, wiring, arg, var_end))
    return ("p", nid, 0)


def instantiate(net: Net) -> RuntimeNet:
    """Build the graph: one node per agent term, wires from shared variables.

    Once-occurring variables become named interface ports; closed wire loops
    (a variable equated with itself) vanish.
    """
    rn = RuntimeNet()
    wiring = _Wiring()
    counts = variable_occurrences(net)

    def var_end(name: str) -> End:
        return ("f", name) if counts[name] == 1 else ("v", name)

    for eq in net.equations:
        left = _build_term(rn, wiring, eq.left, var_end)
        right = _build_term(rn, wiring, eq.right, var_end)
        wiring.union(left, right)
    for a, b in wiring.resolve():
        rn.link(a, b)
    return rn


def readback(rn: RuntimeNet) -> Net:
    """Textual net: one equation per node, plus interface-to-interface wires."""
    interface = rn.interface()
    edge_name: dict[frozenset, str] = {}
    counter = 0

    def name_of(port: End) -> str:
        nonlocal counter
        peer = rn.links[port]
        if peer[0] == "f":
            return peer[1]
        key = frozenset((port, peer))
        if key not in edge_name:
            while True:
                candidate = f"w{counter}"
                counter += 1
                if candidate not in interface:
                    break
            edge_name[key] = candidate
        return edge_name[key]

    eqs = []
    for nid in sorted(rn.nodes):
        sym = rn.nodes[nid]
        principal = name_of(("p", nid, 0))
        args = tuple(Var(name_of(("p", nid, i))) for i in range(1, sym.arity + 1))
        eqs.append(Equation(Var(principal), Agent(sym, args)))
    wire_pairs = sorted(
        {tuple(sorted((a[1], b[1]))) for a, b in rn.links.items() if a[0] == "f" and b[0] == "f"}
    )
    for x, y in wire_pairs:
        eqs.append(Equation(Var(x), Var(y)))
    return Net(tuple(eqs))


# Matching and application ---------------------------------------------------


def _match_pattern(rn: RuntimeNet, pattern: RulePattern, na: int, nb: int):
    """Match a (possibly nested) pattern against the active pair (na, nb).

    Returns (matched node list, variable -> port slot) or None.  A nested
    agent matches only when the net connects it through its principal port.
    """
    if rn.nodes[na] != pattern.left.symbol or rn.nodes[nb] != pattern.right.symbol:
        return None
    matched = [na, nb]
    slots: dict[str, End] = {}

    def walk(nid: int, term: Agent) -> bool:
        for i, arg in enumerate(term.args, start=1):
            port = ("p", nid, i)
            if isinstance(arg, Var):
                slots[arg.name] = port
                continue
            peer = rn.links[port]
            if peer[0] != "p" or peer[2] != 0:
                return False
            child = peer[1]
            if rn.nodes[child] != arg.symbol:
                return False
            matched.append(child)
            if not walk(child, arg):
                return False
        return True

    if walk(na, pattern.left) and walk(nb, pattern.right):
        return matched, slots
    return None


def find_match(rn: RuntimeNet, pair: tuple[int, int], rules: list[Rule]):
    """First rule whose pattern matches the pair, in either orientation."""
    na, nb = pair
    for rule in rules:
        for a, b in ((na, nb), (nb, na)):
            hit = _match_pattern(rn, rule.lhs, a, b)
            if hit is not None:
                return rule, hit[0], hit[1]
    return None


def apply_match(rn: RuntimeNet, matched: list[int], slots: dict[str, End], rule: Rule):
    """Replace the matched agents by the rule's right side; free ports survive.

    Returns the active pairs created by the new links.
    """
    wiring = _Wiring()
    matched_set = set(matched)

    for nid in matched:
        for idx in range(rn.nodes[nid].arity + 1):
            port = ("p", nid, idx)
            peer = rn.links[port]
            stub = ("s", nid, idx)
            if peer[0] == "p" and peer[1] in matched_set:
                wiring.union(stub, ("s", peer[1], peer[2]))
            else:
                wiring.union(stub, peer)

    for name, port in slots.items():
        wiring.union(("v", name), ("s", port[1], port[2]))

    def var_end(name: str) -> End:
        return ("v", name)

    for eq in rule.rhs.equations:
        left = _build_term(rn, wiring, eq.left, var_end)
        right = _build_term(rn, wiring, eq.right, var_end)
        wiring.union(left, right)

    for nid in matched:
        for idx in range(rn.nodes[nid].arity + 1):
            port = ("p", nid, idx)
            peer = rn.links.pop(port, None)
            if peer is not None and rn.links.get(peer) == port:
                del rn.links[peer]
        del rn.nodes[nid]

    new_pairs = []
    for a, b in wiring.resolve():
        rn.link(a, b)
        if a[0] == "p" and b[0] == "p" and a[2] == 0 and b[2] == 0:
            new_pairs.append((min(a[1], b[1]), max(a[1], b[1])))
    return new_pairs


def apply_rule(rn: RuntimeNet, pair: tuple[int, int], rule: Rule):
    """Apply one rule at one active pair; raises MatchFailure if it does not match."""
    na, nb = pair
    hit = _match_pattern(rn, rule.lhs, na, nb) or _match_pattern(rn, rule.lhs, nb, na)
    if hit is None:
        raise MatchFailure(f"rule {rule.name} does not match pair {pair}")
    return apply_match(rn, hit[0], hit[1], rule)


# Reduction ------------------------------------------------------------------


@dataclass
class TraceStep:
    index: int
    rule_name: str
    left_symbol: str
    right_symbol: str

    def line(self) -> str:
        return f"step {self.index}: {self.rule_name} on {self.left_symbol} >< {self.right_symbol}"


@dataclass
class Trace:
    steps: list[TraceStep] = field(default_factory=list)
    final_text: str = ""
    blocked_pairs: int = 0

    def final_line(self) -> str:
        if self.blocked_pairs:
            return f"blocked pairs: {self.blocked_pairs}"
        return f"normal form: {self.final_text}".rstrip()

    def lines(self) -> list[str]:
        return [s.line() for s in self.steps] + [self.final_line()]


def _rule_index(rules: Iterable[Rule]) -> dict[frozenset, list[Rule]]:
    index: dict[frozenset, list[Rule]] = {}
    for rule in rules:
        index.setdefault(rule.lhs.unordered_roots(), []).append(rule)
    return index


def reduce(
    rn: RuntimeNet,
    rules: list[Rule],
    mode: str = "orn",
    max_steps: int = DEFAULT_MAX_STEPS,
    strategy: str = "fifo",
    seed: int = 0,
    debug_checks: bool = False,
) -> tuple[RuntimeNet, Trace]:
    """Reduce to normal form under the given strategy.

    In ``orn`` mode all rules must be ordinary.  In ``direct`` mode nested
    patterns are matched in place; an active pair whose rules all fail to
    match is parked and retried after the next successful step, since later
    steps can complete a nested match.  Pairs with no rule at all stay
    blocked.  Raises StepLimitExceeded when work remains after max_steps
    applications.
    """
    if mode not in ("orn", "direct"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "orn":
        bad = [r.name for r in rules if r.lhs.is_inp()]
        if bad:
            raise ValueError(f"orn mode requires ordinary rules; nested: {', '.join(bad)}")
    if strategy not in ("fifo", "lifo", "random"):
        raise ValueError(f"unknown strategy {strategy!r}")

    index = _rule_index(rules)
    rng = random.Random(seed)
    queue: list[tuple[int, int]] = rn.active_pairs()
    no_rule: list[tuple[int, int]] = []
    unmatched: list[tuple[int, int]] = []
    steps: list[TraceStep] = []

    while queue:
        if strategy == "fifo":
            pair = queue.pop(0)
        elif strategy == "lifo":
            pair = queue.pop()
        else:
            pair = queue.pop(rng.randrange(len(queue)))

        candidates = index.get(frozenset({rn.nodes[pair[0]].name, rn.nodes[pair[1]].name}), [])
        if not candidates:
            no_rule.append(pair)
            continue
        hit = find_match(rn, pair, candidates)
        if hit is None:
            unmatched.append(pair)
            continue
        rule, matched, slots = hit
        if len(steps) >= max_steps:
            blocked = len(no_rule) + len(unmatched) + len(queue) + 1
            trace = Trace(steps, canonical_net(readback(rn)), blocked)
            raise StepLimitExceeded(max_steps, rn, trace)
        new_pairs = apply_match(rn, matched, slots, rule)
        steps.append(TraceStep(len(steps) + 1, rule.name, *rule.lhs.root_names()))
        queue.extend(new_pairs)
        if unmatched:
            # A nested match can succeed once surrounding agents appear.
            queue.extend(unmatched)
            unmatched = []
        if debug_checks:
            rn.check_ports()
            live = set(rn.active_pairs())
            tracked = set(queue) | set(no_rule) | set(unmatched)
            assert live == tracked, f"pair bookkeeping out of sync: {live} != {tracked}"

    blocked = no_rule + unmatched
    trace = Trace(steps, canonical_net(readback(rn)), len(blocked))
    return rn, trace


# Net equivalence ------------------------------------------------------------


def runtime_iso(r1: RuntimeNet, r2: RuntimeNet) -> bool:
    """Graph isomorphism over nodes, respecting symbols and interface names."""
    if sorted(s.name for s in r1.nodes.values()) != sorted(s.name for s in r2.nodes.values()):
        return False
    if r1.interface() != r2.interface():
        return False
    wires1 = {frozenset((a[1], b[1])) for a, b in r1.links.items() if a[0] == "f" and b[0] == "f"}
    wires2 = {frozenset((a[1], b[1])) for a, b in r2.links.items() if a[0] == "f" and b[0] == "f"}
    if wires1 != wires2:
        return False

    nodes1 = sorted(r1.nodes, key=lambda n: (r1.nodes[n].name, n))
    by_symbol: dict[AgentSymbol, list[int]] = {}
    for n in r2.nodes:
        by_symbol.setdefault(r2.nodes[n], []).append(n)

    mapping: dict[int, int] = {}
    used: set[int] = set()

    def consistent(n1: int, n2: int) -> bool:
        for idx in range(r1.nodes[n1].arity + 1):
            peer1 = r1.links[("p", n1, idx)]
            peer2 = r2.links[("p", n2, idx)]
            if peer1[0] == "f":
                if peer2 != peer1:
                    return False
            else:
                if peer2[0] != "p":
                    return False
                other = peer1[1]
                if other in mapping:
                    if peer2 != ("p", mapping[other], peer1[2]):
                        return False
                elif peer2[1] in used:
                    return False
        return True

    def assign(i: int) -> bool:
        if i == len(nodes1):
            return True
        n1 = nodes1[i]
        for n2 in by_symbol.get(r1.nodes[n1], []):
            if n2 in used:
                continue
            mapping[n1] = n2
            used.add(n2)
            if consistent(n1, n2) and assign(i + 1):
                return True
            del mapping[n1]
            used.remove(n2)
        return False

    return assign(0)


def net_alpha_equivalent(a: Net, b: Net) -> bool:
    """Nets denote the same graph up to renaming of bound variables."""
    return runtime_iso(instantiate(a), instantiate(b))
