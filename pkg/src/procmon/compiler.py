"""Embed a temporal goal's automaton into a ground FOND task.

The compiled task alternates world moves and automaton moves. A turn fluent
gates them: every world action consumes the world turn, then exactly one
applicable sync action reads the new state (via the edge guards of the goal
DFA), advances the automaton-state fluent, and returns the turn. The goal
becomes the plain conjunction {world turn, automaton in an accepting state},
so any conjunctive-goal FOND planner applies unchanged.

Action symbols in the formula are realized as "just executed" marker fluents:
each world action clears all markers and sets those matching its own name, so
the interpretation the automaton reads right after a world move reflects both
the new world fluents and which action produced them. The automaton consumes
the initial state before any action, then one interpretation per world move.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ltlf import Dfa, Formula, Trace, atoms, dnf_cubes, to_dfa
from .pddl import (
    ActionSchema, FondDomain, FondProblem, GroundAction, GroundTask,
    Literal, Outcome, Predicate,
)

TURN_FLUENT = "(world-turn)"
ACCEPT_FLUENT = "(aut-accepting)"


class CompileError(ValueError):
    pass


@dataclass(frozen=True)
class CompiledTask:
    """Augmented ground task plus the bookkeeping needed to look back through it.

    Original fluents keep their ids; automaton-state, turn, acceptance, and
    marker fluents are appended after them.
    """

    task: GroundTask
    dfa: Dfa
    goal: Formula
    atom_map: dict[str, str]
    n_world_fluents: int
    turn_id: int
    accept_id: int
    state_ids: tuple[int, ...]  # DFA state -> fluent id
    marker_ids: dict[str, int]  # action label -> fluent id
    fluent_atoms: dict[str, int]  # formula atom -> world fluent id
    action_atoms: dict[str, str]  # formula atom -> action label

    def world_state(self, state: frozenset[int]) -> frozenset[int]:
        return frozenset(f for f in state if f < self.n_world_fluents)

    def automaton_state(self, state: frozenset[int]) -> int:
        hits = [q for q, fid in enumerate(self.state_ids) if fid in state]
        if len(hits) != 1:
            raise ValueError(f"expected exactly one automaton fluent, found {len(hits)}")
        return hits[0]

    def trace_interp(self, state: frozenset[int]) -> frozenset[str]:
        """Goal-atom interpretation read off a compiled state at a world turn."""
        true = set()
        for atom, fid in self.fluent_atoms.items():
            if fid in state:
                true.add(atom)
        for atom, label in self.action_atoms.items():
            if self.marker_ids[label] in state:
                true.add(atom)
        return frozenset(true)

    def induced_trace(self, states: list[frozenset[int]]) -> Trace:
        """Trace over the goal's atoms sampled at consecutive world turns."""
        steps = tuple(self.trace_interp(s) for s in states)
        return Trace(steps, alphabet=frozenset(self.atom_map))

    def is_world_action(self, name: str) -> bool:
        return not name.startswith("(sync ")


def _marker_key(label: str) -> str:
    mangled = label.strip("()").replace(" ", "_")
    return f"(did {mangled})"


def compile_task(
    task: GroundTask,
    goal: Formula,
    atom_map: dict[str, str],
    max_dfa_states: int = 10_000,
) -> CompiledTask:
    """Compile `task` with temporal goal `goal` under the given symbol mapping.

    atom_map sends each formula atom to a world fluent key ('(ripe g1)'), a
    ground action name ('(move l0 l1)'), or an action schema name ('move').
    """
    unmapped = atoms(goal) - set(atom_map)
    if unmapped:
        raise CompileError(f"unmapped formula atoms: {sorted(unmapped)}")
    schema_names = {a.schema for a in task.actions}
    ground_names = {a.name for a in task.actions}
    fluent_atoms: dict[str, int] = {}
    action_atoms: dict[str, str] = {}
    for atom, target in atom_map.items():
        if target in task.fluent_ids:
            fluent_atoms[atom] = task.fluent_ids[target]
        elif target in schema_names or target in ground_names:
            action_atoms[atom] = target
        else:
            raise CompileError(f"atom {atom!r} mapped to unknown fluent or action {target!r}")

    dfa = to_dfa(goal, alphabet=atom_map.keys(), max_states=max_dfa_states)

    n_world = len(task.fluents)
    new_fluents = list(task.fluents)

    def add_fluent(key: str) -> int:
        if key in task.fluent_ids:
            raise CompileError(f"domain already uses reserved fluent {key}")
        new_fluents.append(key)
        return len(new_fluents) - 1

    turn_id = add_fluent(TURN_FLUENT)
    accept_id = add_fluent(ACCEPT_FLUENT)
    state_ids = tuple(add_fluent(f"(aut-state q{q})") for q in range(dfa.n_states))
    labels = sorted(set(action_atoms.values()))
    marker_ids = {label: add_fluent(_marker_key(label)) for label in labels}
    all_markers = frozenset(marker_ids.values())

    world_actions = []
    for a in task.actions:
        mine = frozenset(
            marker_ids[label]
            for label in labels
            if label == a.schema or label == a.name
        )
        world_actions.append(
            GroundAction(
                name=a.name,
                schema=a.schema,
                args=a.args,
                precondition_pos=a.precondition_pos | {turn_id},
                precondition_neg=a.precondition_neg,
                outcomes=tuple(
                    Outcome(
                        add=o.add | mine,
                        delete=(o.delete - mine) | {turn_id} | (all_markers - mine),
                    )
                    for o in a.outcomes
                ),
            )
        )

    sync_actions = []
    for src, guard, dst in dfa.edges:
        for cube in dnf_cubes(guard):
            pos, neg = {state_ids[src]}, {turn_id}
            for atom, want in sorted(cube.items()):
                fid = fluent_atoms.get(atom)
                if fid is None:
                    fid = marker_ids[action_atoms[atom]]
                (pos if want else neg).add(fid)
            add = {state_ids[dst], turn_id}
            delete = set()
            if dst in dfa.accepting:
                add.add(accept_id)
            else:
                delete.add(accept_id)
            if src != dst:
                delete.add(state_ids[src])
            k = len(sync_actions)
            sync_actions.append(
                GroundAction(
                    name=f"(sync q{src} {k})",
                    schema="sync",
                    args=(f"q{src}", str(k)),
                    precondition_pos=frozenset(pos),
                    precondition_neg=frozenset(neg),
                    outcomes=(Outcome(add=frozenset(add), delete=frozenset(delete)),),
                )
            )

    # the automaton reads the initial state before the first action
    init_interp = frozenset(
        a for a, fid in fluent_atoms.items() if fid in task.initial
    )
    q0 = dfa.step(dfa.initial, init_interp)
    initial = set(task.initial) | {turn_id, state_ids[q0]}
    if q0 in dfa.accepting:
        initial.add(accept_id)

    compiled = GroundTask(
        fluents=tuple(new_fluents),
        actions=tuple(world_actions + sync_actions),
        initial=frozenset(initial),
        goal_pos=frozenset({turn_id, accept_id}),
        goal_neg=frozenset(),
    )
    return CompiledTask(
        task=compiled,
        dfa=dfa,
        goal=goal,
        atom_map=dict(atom_map),
        n_world_fluents=n_world,
        turn_id=turn_id,
        accept_id=accept_id,
        state_ids=state_ids,
        marker_ids=marker_ids,
        fluent_atoms=fluent_atoms,
        action_atoms=action_atoms,
    )


def _mangle(key: str, taken: dict[str, str]) -> str:
    name = key.strip("()").replace(" ", "_")
    base = name
    n = 2
    while name in taken and taken[name] != key:
        name = f"{base}__{n}"
        n += 1
    taken[name] = key
    return name


def export_compiled(compiled: CompiledTask, name: str = "compiled") -> tuple[FondDomain, FondProblem]:
    """Propositional PDDL view of the compiled task; round-trips through the parser."""
    task = compiled.task
    taken: dict[str, str] = {}
    fluent_names = [_mangle(f, taken) for f in task.fluents]
    predicates = tuple(Predicate(n) for n in fluent_names)

    action_taken: dict[str, str] = {}
    schemas = []
    for a in task.actions:
        pre = tuple(
            [Literal(fluent_names[f]) for f in sorted(a.precondition_pos)]
            + [Literal(fluent_names[f], negated=True) for f in sorted(a.precondition_neg)]
        )
        outcomes = tuple(
            tuple(
                [Literal(fluent_names[f]) for f in sorted(o.add)]
                + [Literal(fluent_names[f], negated=True) for f in sorted(o.delete)]
            )
            for o in a.outcomes
        )
        schemas.append(ActionSchema(_mangle(a.name, action_taken), (), pre, outcomes))

    domain = FondDomain(f"{name}-domain", (), predicates, tuple(schemas))
    problem = FondProblem(
        name=f"{name}-problem",
        domain_name=domain.name,
        objects=(),
        init=tuple(Literal(fluent_names[f]) for f in sorted(task.initial)),
        goal=tuple(Literal(fluent_names[f]) for f in sorted(task.goal_pos)),
    )
    return domain, problem
