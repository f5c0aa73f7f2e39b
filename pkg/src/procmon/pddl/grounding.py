"""Instantiate a typed FOND task into its propositional form."""

from __future__ import annotations

import itertools

from .model import (
    FondDomain, FondProblem, GroundAction, GroundTask, Literal, Outcome,
)


class GroundingError(ValueError):
    pass


def atom_key(predicate: str, args: tuple[str, ...] = ()) -> str:
    """Canonical ground-fluent name, e.g. '(robot-at l1)'."""
    return "(" + " ".join((predicate,) + tuple(args)) + ")"


def _objects_by_type(domain: FondDomain, problem: FondProblem) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    all_types = domain.type_names()
    for ty in all_types:
        out[ty] = [
            obj for obj, oty in problem.objects if domain.is_subtype(oty, ty)
        ]
    return out


def ground(
    domain: FondDomain,
    problem: FondProblem,
    max_ground_actions: int = 200_000,
    prune_unreachable: bool = False,
) -> GroundTask:
    """Enumerate all type-consistent schema instantiations.

    Equality literals in preconditions are resolved statically against each
    binding. With prune_unreachable, actions whose positive preconditions are
    not delete-relaxation reachable from the initial state are dropped.
    """
    pools = _objects_by_type(domain, problem)
    fluent_set: set[str] = set()
    raw_actions: list[tuple[str, str, tuple[str, ...], list, list, list]] = []
    count = 0
    for schema in domain.actions:
        domains = []
        for var, ty in schema.parameters:
            del var
            domains.append(pools.get(ty, []))
        for binding in itertools.product(*domains):
            count += 1
            if count > max_ground_actions:
                raise GroundingError(
                    f"grounding exceeds {max_ground_actions} actions"
                )
            env = {var: val for (var, _), val in zip(schema.parameters, binding)}
            pre_pos, pre_neg = [], []
            consistent = True
            for lit in schema.precondition:
                args = tuple(env.get(a, a) for a in lit.args)
                if lit.predicate == "=":
                    if (args[0] == args[1]) == lit.negated:
                        consistent = False
                        break
                    continue
                key = atom_key(lit.predicate, args)
                (pre_neg if lit.negated else pre_pos).append(key)
            if not consistent:
                continue
            outcomes = []
            for outcome in schema.outcomes:
                add, delete = [], []
                for lit in outcome:
                    args = tuple(env.get(a, a) for a in lit.args)
                    key = atom_key(lit.predicate, args)
                    (delete if lit.negated else add).append(key)
                outcomes.append((add, delete))
            name = atom_key(schema.name, binding)
            fluent_set.update(pre_pos)
            fluent_set.update(pre_neg)
            for add, delete in outcomes:
                fluent_set.update(add)
                fluent_set.update(delete)
            raw_actions.append((name, schema.name, binding, pre_pos, pre_neg, outcomes))

    init_keys = {atom_key(l.predicate, l.args) for l in problem.init}
    goal_pos_keys, goal_neg_keys = set(), set()
    for lit in problem.goal or ():
        key = atom_key(lit.predicate, lit.args)
        (goal_neg_keys if lit.negated else goal_pos_keys).add(key)
    fluent_set |= init_keys | goal_pos_keys | goal_neg_keys

    if prune_unreachable:
        raw_actions = _relaxed_reachable(init_keys, raw_actions)

    fluents = tuple(sorted(fluent_set))
    ids = {f: i for i, f in enumerate(fluents)}
    actions = tuple(
        GroundAction(
            name=name,
            schema=schema,
            args=tuple(binding),
            precondition_pos=frozenset(ids[k] for k in pre_pos),
            precondition_neg=frozenset(ids[k] for k in pre_neg),
            outcomes=tuple(
                Outcome(
                    add=frozenset(ids[k] for k in add),
                    delete=frozenset(ids[k] for k in delete),
                )
                for add, delete in outcomes
            ),
        )
        for name, schema, binding, pre_pos, pre_neg, outcomes in raw_actions
    )
    return GroundTask(
        fluents=fluents,
        actions=actions,
        initial=frozenset(ids[k] for k in init_keys),
        goal_pos=frozenset(ids[k] for k in goal_pos_keys),
        goal_neg=frozenset(ids[k] for k in goal_neg_keys),
    )


def _relaxed_reachable(init_keys: set[str], raw_actions: list) -> list:
    # delete-relaxation fixpoint ignoring negative preconditions
    reachable = set(init_keys)
    kept_idx: set[int] = set()
    changed = True
    while changed:
        changed = False
        for i, (_, _, _, pre_pos, _, outcomes) in enumerate(raw_actions):
            if i in kept_idx or not set(pre_pos) <= reachable:
                continue
            kept_idx.add(i)
            for add, _ in outcomes:
                for k in add:
                    if k not in reachable:
                        reachable.add(k)
                        changed = True
    return [a for i, a in enumerate(raw_actions) if i in kept_idx]
