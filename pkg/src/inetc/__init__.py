"""Interaction-net compiler and runtime with nested pattern matching on rules."""

from .core import (
    Agent,
    AgentSymbol,
    Equation,
    Net,
    Rule,
    RulePattern,
    Var,
    alpha_equivalent,
    check_linearity,
    free_variables,
    rule_alpha_equivalent,
)
from .check import (
    is_subnet,
    pos,
    pos_sym,
    sequential_compatible,
    verify_well_formed,
)
from .parser import Program, parse_net, parse_program
from .printer import format_program, format_rule
from .runtime import instantiate, net_alpha_equivalent, readback, reduce
from .translate import first_nested_position, translate_program

__all__ = [
    "Agent",
    "AgentSymbol",
    "Equation",
    "Net",
    "Program",
    "Rule",
    "RulePattern",
    "Var",
    "alpha_equivalent",
    "check_linearity",
    "first_nested_position",
    "format_program",
    "format_rule",
    "free_variables",
    "instantiate",
    "is_subnet",
    "net_alpha_equivalent",
    "parse_net",
    "parse_program",
    "pos",
    "pos_sym",
    "readback",
    "reduce",
    "rule_alpha_equivalent",
    "sequential_compatible",
    "translate_program",
    "verify_well_formed",
]
