"""Independently coded reference implementations used to check the package.

Everything here is deliberately written from the definitions, sharing no code
with the implementations under test: a mu-calculus-style strong-cyclic
solvability check, a random FOND task generator, and a brute-force
soundness/completeness evaluator over explicit index ranges.
"""

from __future__ import annotations

import random
from fractions import Fraction

from procmon.pddl import GroundAction, GroundTask, Outcome


def enumerate_states(task: GroundTask, cap: int = 100_000) -> set[frozenset[int]]:
    states = {task.initial}
    stack = [task.initial]
    while stack:
        s = stack.pop()
        for a in task.actions:
            if not (a.precondition_pos <= s) or (a.precondition_neg & s):
                continue
            for o in a.outcomes:
                t = (s - o.delete) | o.add
                if t not in states:
                    if len(states) >= cap:
                        raise RuntimeError("oracle state cap exceeded")
                    states.add(t)
                    stack.append(t)
    return states


def strong_cyclic_oracle(task: GroundTask) -> bool:
    """nu Z. mu Y. (goal or: some action, all outcomes in Z, one in Y)."""
    states = enumerate_states(task)
    goals = {
        s for s in states
        if task.goal_pos <= s and not (task.goal_neg & s)
    }
    transitions: dict[frozenset[int], list[list[frozenset[int]]]] = {}
    for s in states:
        outs = []
        for a in task.actions:
            if a.precondition_pos <= s and not (a.precondition_neg & s):
                outs.append([(s - o.delete) | o.add for o in a.outcomes])
        transitions[s] = outs

    z = set(states)
    while True:
        y = set(goals)
        while True:
            grown = False
            for s in states:
                if s in y:
                    continue
                for outcome_states in transitions[s]:
                    if all(t in z for t in outcome_states) and any(
                        t in y for t in outcome_states
                    ):
                        y.add(s)
                        grown = True
                        break
            if not grown:
                break
        if y == z:
            return task.initial in z
        z = y


def random_fond_task(rng: random.Random) -> GroundTask:
    """Small random task: <= 6 fluents, <= 7 actions, <= 3 outcomes each."""
    nf = rng.randint(2, 6)
    ids = range(nf)
    actions = []
    for i in range(rng.randint(1, 7)):
        pre_pos = frozenset(rng.sample(ids, rng.randint(0, min(2, nf))))
        rest = [f for f in ids if f not in pre_pos]
        pre_neg = frozenset(rng.sample(rest, rng.randint(0, min(1, len(rest)))))
        outcomes = []
        for _ in range(rng.randint(1, 3)):
            add = frozenset(rng.sample(ids, rng.randint(0, 2)))
            delete = frozenset(rng.sample(ids, rng.randint(0, 2)))
            outcomes.append(Outcome(add=add, delete=delete))
        actions.append(
            GroundAction(
                name=f"(a{i})",
                schema=f"a{i}",
                args=(),
                precondition_pos=pre_pos,
                precondition_neg=pre_neg,
                outcomes=tuple(outcomes),
            )
        )
    return GroundTask(
        fluents=tuple(f"(f{i})" for i in ids),
        actions=tuple(actions),
        initial=frozenset(rng.sample(ids, rng.randint(0, nf))),
        goal_pos=frozenset(rng.sample(ids, rng.randint(1, min(2, nf)))),
    )


def score_oracle(predicted: frozenset, states: list[frozenset], t: int, scenario: str):
    """Exact-rational soundness/completeness straight from the definitions.

    states is 1-indexed conceptually: states[0] is s_1. Returns (S, C) as
    Fractions. Conventions: empty prediction scores S=1, C=0 at every
    instant; an empty true state with a non-empty prediction scores C=1.
    """
    big_t = len(states)

    def s_i(i: int) -> Fraction:
        f_i = states[i - 1]
        if not predicted:
            return Fraction(1)
        return Fraction(len(predicted & f_i), len(predicted))

    def c_i(i: int) -> Fraction:
        f_i = states[i - 1]
        if not predicted:
            return Fraction(0)
        if not f_i:
            return Fraction(1)
        return Fraction(len(predicted & f_i), len(f_i))

    if scenario == "present":
        return s_i(t), c_i(t)
    if scenario == "past":
        rng = list(range(1, t + 1))
    elif scenario == "future":
        rng = list(range(t, big_t + 1))
    else:
        raise ValueError(scenario)
    s = sum((s_i(i) for i in rng), Fraction(0)) / len(rng)
    c = sum((c_i(i) for i in rng), Fraction(0)) / len(rng)
    return s, c
