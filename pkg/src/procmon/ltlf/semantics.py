"""Reference satisfaction relation for finite, non-empty traces.

This is the semantic ground truth the automaton construction is checked
against: X is false at the last instant, WX is true there, and F/G/U
quantify over the remaining suffix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .syntax import (
    And, Atom, Eventually, FalseConst, Formula, Globally, Iff, Implies,
    Next, Not, Or, TrueConst, Until, WeakNext, atoms,
)

State = frozenset[str]


@dataclass(frozen=True)
class Trace:
    """Non-empty sequence of states; each state is the set of atoms true then."""

    steps: tuple[State, ...]
    alphabet: frozenset[str] = field(default=frozenset())

    def __post_init__(self):
        if len(self.steps) == 0:
            raise ValueError("traces must contain at least one state")
        seen = frozenset().union(*self.steps)
        if not self.alphabet:
            object.__setattr__(self, "alphabet", seen)
        elif not seen <= self.alphabet:
            raise ValueError(f"trace atoms {sorted(seen - self.alphabet)} outside declared alphabet")

    def __len__(self) -> int:
        return len(self.steps)


def trace(*steps, alphabet=()) -> Trace:
    """Convenience constructor: trace({'a'}, {}, {'a','b'})."""
    return Trace(tuple(frozenset(s) for s in steps), frozenset(alphabet))


def evaluate(f: Formula, t: Trace) -> bool:
    """Standard LTLf satisfaction of f at the first instant of t."""
    missing = atoms(f) - t.alphabet
    if missing:
        raise ValueError(f"formula atoms {sorted(missing)} not in trace alphabet")
    return _sat(f, t.steps, 0)


def _sat(f: Formula, steps: tuple[State, ...], i: int) -> bool:
    last = len(steps) - 1
    if isinstance(f, Atom):
        return f.name in steps[i]
    if isinstance(f, TrueConst):
        return True
    if isinstance(f, FalseConst):
        return False
    if isinstance(f, Not):
        return not _sat(f.arg, steps, i)
    if isinstance(f, And):
        return _sat(f.left, steps, i) and _sat(f.right, steps, i)
    if isinstance(f, Or):
        return _sat(f.left, steps, i) or _sat(f.right, steps, i)
    if isinstance(f, Implies):
        return not _sat(f.left, steps, i) or _sat(f.right, steps, i)
    if isinstance(f, Iff):
        return _sat(f.left, steps, i) == _sat(f.right, steps, i)
    if isinstance(f, Next):
        return i < last and _sat(f.arg, steps, i + 1)
    if isinstance(f, WeakNext):
        return i == last or _sat(f.arg, steps, i + 1)
    if isinstance(f, Eventually):
        return any(_sat(f.arg, steps, j) for j in range(i, last + 1))
    if isinstance(f, Globally):
        return all(_sat(f.arg, steps, j) for j in range(i, last + 1))
    if isinstance(f, Until):
        return any(
            _sat(f.right, steps, j) and all(_sat(f.left, steps, k) for k in range(i, j))
            for j in range(i, last + 1)
        )
    raise TypeError(f"unknown formula node {type(f).__name__}")


def all_traces(alphabet, max_len: int):
    """Every trace over the alphabet with 1 <= length <= max_len.

    Exhaustive oracle helper: 2^|alphabet| interpretations per step.
    """
    alphabet = sorted(alphabet)
    interps = []
    for bits in range(2 ** len(alphabet)):
        interps.append(frozenset(a for i, a in enumerate(alphabet) if bits >> i & 1))
    frontier = [(s,) for s in interps]
    while frontier:
        batch = frontier
        frontier = []
        for steps in batch:
            yield Trace(steps, frozenset(alphabet))
            if len(steps) < max_len:
                frontier.extend(steps + (s,) for s in interps)
