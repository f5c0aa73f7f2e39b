"""Typed FOND planning model and its propositional (ground) form."""

from __future__ import annotations

from dataclasses import dataclass, field

ROOT_TYPE = "object"


@dataclass(frozen=True)
class Literal:
    """Possibly negated predicate application; args are ?variables or constants."""

    predicate: str
    args: tuple[str, ...] = ()
    negated: bool = False

    def __str__(self) -> str:
        inner = f"({' '.join((self.predicate,) + self.args)})"
        return f"(not {inner})" if self.negated else inner


@dataclass(frozen=True)
class Predicate:
    name: str
    parameters: tuple[tuple[str, str], ...] = ()  # (?variable, type)

    @property
    def arity(self) -> int:
        return len(self.parameters)


@dataclass(frozen=True)
class ActionSchema:
    """Action with a one-of list of outcomes; one outcome means deterministic."""

    name: str
    parameters: tuple[tuple[str, str], ...] = ()
    precondition: tuple[Literal, ...] = ()
    outcomes: tuple[tuple[Literal, ...], ...] = ((),)

    def __post_init__(self):
        if not self.outcomes:
            raise ValueError(f"action {self.name}: empty outcome list")


@dataclass(frozen=True)
class FondDomain:
    name: str
    types: tuple[tuple[str, str], ...] = ()  # (type, parent), root implied
    predicates: tuple[Predicate, ...] = ()
    actions: tuple[ActionSchema, ...] = ()

    def predicate(self, name: str) -> Predicate:
        for p in self.predicates:
            if p.name == name:
                return p
        raise KeyError(name)

    def type_names(self) -> set[str]:
        out = {ROOT_TYPE}
        for t, parent in self.types:
            out.add(t)
            out.add(parent)
        return out

    def is_subtype(self, t: str, ancestor: str) -> bool:
        if ancestor == ROOT_TYPE or t == ancestor:
            return True
        parents = dict(self.types)
        seen = set()
        while t in parents and t not in seen:
            seen.add(t)
            t = parents[t]
            if t == ancestor:
                return True
        return False


@dataclass(frozen=True)
class FondProblem:
    name: str
    domain_name: str
    objects: tuple[tuple[str, str], ...] = ()  # (name, type)
    init: tuple[Literal, ...] = ()
    goal: tuple[Literal, ...] | None = None


@dataclass(frozen=True)
class Outcome:
    add: frozenset[int]
    delete: frozenset[int]


@dataclass(frozen=True)
class GroundAction:
    name: str  # canonical "(schema arg ...)" form
    schema: str
    args: tuple[str, ...]
    precondition_pos: frozenset[int]
    precondition_neg: frozenset[int]
    outcomes: tuple[Outcome, ...]


@dataclass(frozen=True)
class GroundTask:
    """Propositional transition system: fluents indexed 0..n-1, set-based states."""

    fluents: tuple[str, ...]
    actions: tuple[GroundAction, ...]
    initial: frozenset[int]
    goal_pos: frozenset[int] = frozenset()
    goal_neg: frozenset[int] = frozenset()
    fluent_ids: dict[str, int] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.fluent_ids:
            object.__setattr__(
                self, "fluent_ids", {f: i for i, f in enumerate(self.fluents)}
            )

    def applicable(self, state: frozenset[int], action: GroundAction) -> bool:
        return action.precondition_pos <= state and not (
            action.precondition_neg & state
        )

    def apply(
        self, state: frozenset[int], action: GroundAction, outcome: int
    ) -> frozenset[int]:
        o = action.outcomes[outcome]
        return (state - o.delete) | o.add

    def successors(
        self, state: frozenset[int], action: GroundAction
    ) -> list[frozenset[int]]:
        return [self.apply(state, action, k) for k in range(len(action.outcomes))]

    def is_goal(self, state: frozenset[int]) -> bool:
        return self.goal_pos <= state and not (self.goal_neg & state)

    def state_fluents(self, state: frozenset[int]) -> list[str]:
        return sorted(self.fluents[i] for i in state)
