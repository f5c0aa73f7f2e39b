"""FOND subset of PDDL: parsing, printing, grounding."""

from .grounding import GroundingError, atom_key, ground
from .model import (
    ActionSchema,
    FondDomain,
    FondProblem,
    GroundAction,
    GroundTask,
    Literal,
    Outcome,
    Predicate,
    ROOT_TYPE,
)
from .parser import PddlSyntaxError, parse_domain, parse_problem
from .writer import write_domain, write_problem

__all__ = [
    "ActionSchema", "FondDomain", "FondProblem", "GroundAction", "GroundTask",
    "GroundingError", "Literal", "Outcome", "PddlSyntaxError", "Predicate",
    "ROOT_TYPE", "atom_key", "ground", "parse_domain", "parse_problem",
    "write_domain", "write_problem",
]
