"""Finite-trace temporal logic: syntax, semantics, automata."""

from .automata import (
    Dfa,
    DfaTooLarge,
    dfa_accepts,
    dfa_equivalent,
    dnf_cubes,
    eval_prop,
    format_dfa,
    minimize_dfa,
    progress,
    to_dfa,
)
from .semantics import State, Trace, all_traces, evaluate, trace
from .syntax import (
    And,
    Atom,
    Eventually,
    FALSE,
    FalseConst,
    Formula,
    Globally,
    Iff,
    Implies,
    LtlfSyntaxError,
    Next,
    Not,
    Or,
    TRUE,
    TrueConst,
    Until,
    WeakNext,
    atoms,
    normalize,
    parse,
    pretty,
    rename_atoms,
)

__all__ = [
    "And", "Atom", "Dfa", "DfaTooLarge", "Eventually", "FALSE", "FalseConst",
    "Formula", "Globally", "Iff", "Implies", "LtlfSyntaxError", "Next", "Not",
    "Or", "State", "TRUE", "Trace", "TrueConst", "Until", "WeakNext",
    "all_traces", "atoms", "dfa_accepts", "dfa_equivalent", "dnf_cubes",
    "eval_prop",
    "evaluate", "format_dfa", "minimize_dfa", "normalize", "parse", "pretty",
    "progress", "rename_atoms", "to_dfa", "trace",
]
