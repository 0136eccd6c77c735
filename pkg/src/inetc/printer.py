"""Pretty-printing with canonical variable naming for reproducible output."""

from __future__ import annotations

from typing import Iterable, Optional

from .core import Agent, Equation, Net, Rule, RulePattern, Term, Var, term_vars


def _name_stream():
    """a, b, ..., z, aa, ab, ..."""
    import itertools
    import string

    for size in itertools.count(1):
        for letters in itertools.product(string.ascii_lowercase, repeat=size):
            yield "".join(letters)


def format_term(term: Term, rename: dict[str, str] | None = None) -> str:
    if isinstance(term, Var):
        return rename.get(term.name, term.name) if rename else term.name
    if not term.args:
        return term.symbol.name
    args = ",".join(format_term(a, rename) for a in term.args)
    return f"{term.symbol.name}({args})"


def format_equation(eq: Equation, rename: dict[str, str] | None = None) -> str:
    return f"{format_term(eq.left, rename)}~{format_term(eq.right, rename)}"


def _sanitize(net: Net) -> dict[str, str]:
    """Printable names for internal desugaring wires (which start with '%')."""
    taken = set()
    internal = []
    for eq in net.equations:
        for v in list(term_vars(eq.left)) + list(term_vars(eq.right)):
            if v.startswith("%"):
                if v not in internal:
                    internal.append(v)
            else:
                taken.add(v)
    rename: dict[str, str] = {}
    counter = 0
    for v in internal:
        while f"w{counter}" in taken:
            counter += 1
        rename[v] = f"w{counter}"
        counter += 1
    return rename


def format_net(net: Net, rename: dict[str, str] | None = None) -> str:
    if rename is None:
        rename = _sanitize(net)
    return ", ".join(format_equation(eq, rename) for eq in net.equations)


def _rule_renaming(rule: Rule) -> dict[str, str]:
    """Variables renamed a, b, c, ... in order of first appearance."""
    rename: dict[str, str] = {}
    names = _name_stream()
    order: list[str] = []
    order.extend(term_vars(rule.lhs.left))
    order.extend(term_vars(rule.lhs.right))
    for eq in rule.rhs.equations:
        order.extend(term_vars(eq.left))
        order.extend(term_vars(eq.right))
    for v in order:
        if v not in rename:
            rename[v] = next(names)
    return rename


def format_rule(rule: Rule, canonical: bool = True) -> str:
    rename = _rule_renaming(rule) if canonical else None
    lhs = f"{format_term(rule.lhs.left, rename)} >< {format_term(rule.lhs.right, rename)}"
    if not rule.rhs.equations:
        return lhs
    return f"{lhs} => {format_net(rule.rhs, rename)}"


def canonical_net(net: Net) -> str:
    """Net text with bound variables renamed a, b, ...; interface names kept."""
    from .core import free_variables

    keep = free_variables(net)
    names = _name_stream()
    rename: dict[str, str] = {}
    for eq in net.equations:
        for v in list(term_vars(eq.left)) + list(term_vars(eq.right)):
            if v in keep or v in rename:
                continue
            fresh = next(names)
            while fresh in keep:
                fresh = next(names)
            rename[v] = fresh
    return format_net(net, rename)


def format_program(rules: Iterable[Rule], net: Optional[Net] = None) -> str:
    lines = [format_rule(r) for r in rules]
    if net is not None:
        lines.append(f"net {canonical_net(net)}")
    return "\n".join(lines) + "\n" if lines else ""
