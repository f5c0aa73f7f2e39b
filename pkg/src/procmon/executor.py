"""Task manager: runs a verified policy step by step on a compiled task.

A session advances in world time. One `step` applies the policy's world
action, resolves its outcome through the session's chooser, then applies the
bookkeeping actions the compilation interleaves until the world has the turn
again. The stored trace holds only world fluents, so monitoring never sees
automaton bookkeeping.

Outcome choosers follow the planner protocol: callable(action, outcomes) ->
index. Passing chooser=None makes the session interactive: stepping a
nondeterministic action without an explicit choice returns the outcome menu
instead of a transition, which is how a UI can surface the decision.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

from .compiler import CompiledTask
from .planner import (
    PlannerError,
    Policy,
    PlanGraph,
    goal_distances,
    state_key,
    verify_policy,
)

State = frozenset[int]


class ExecutorError(RuntimeError):
    pass


@dataclass(frozen=True)
class ActivityBinding:
    """Maps one action schema to an opaque multi-step activity label."""

    action: str
    label: str
    substeps: tuple[str, ...] = ()


@dataclass(frozen=True)
class TransitionRecord:
    action: str
    outcome_index: int
    state: frozenset[str]
    t: int
    goal: bool
    sync_actions: tuple[str, ...] = ()


@dataclass(frozen=True)
class OutcomeMenu:
    """Returned instead of a transition when an interactive choice is pending."""

    action: str
    options: tuple[tuple[str, ...], ...]


@dataclass
class Session:
    compiled: CompiledTask
    policy: Policy
    graph: PlanGraph
    chooser: object | None
    state: State
    t: int = 1
    trace: list[frozenset[str]] = field(default_factory=list)
    transitions: list[TransitionRecord] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)
    bindings: dict[str, ActivityBinding] = field(default_factory=dict)
    domain_text: str = ""
    problem_text: str = ""
    fairness: int = 3
    _visits: dict[tuple[State, str], int] = field(default_factory=dict)
    _dist: dict[State, int] = field(default_factory=dict)
    _seq: int = 0

    @property
    def done(self) -> bool:
        return self.compiled.task.is_goal(self.state)

    def log(self, kind: str, **fields) -> None:
        self._seq += 1
        self.events.append(
            {"seq": self._seq, "time": time.time(), "event": kind, "t": self.t, **fields}
        )


def _world_fluents(compiled: CompiledTask, state: State) -> frozenset[str]:
    names = compiled.task.fluents
    return frozenset(names[i] for i in compiled.world_state(state))


def _schema_name(action_name: str) -> str:
    return action_name.strip("()").split()[0]


def start_session(
    compiled: CompiledTask,
    policy: Policy,
    chooser: object | None = None,
    bindings: dict[str, ActivityBinding] | None = None,
    domain_text: str = "",
    problem_text: str = "",
) -> Session:
    """Verify the policy, then open a session at t=1 on the initial state."""
    try:
        graph = verify_policy(compiled.task, policy)
    except PlannerError as e:
        raise ExecutorError(f"policy does not fit this task: {e}") from e
    schemas = {_schema_name(a.name) for a in compiled.task.actions}
    for name in (bindings or {}):
        if name not in schemas:
            raise ExecutorError(f"activity binding for unknown action {name!r}")
    session = Session(
        compiled=compiled,
        policy=policy,
        graph=graph,
        chooser=chooser,
        state=compiled.task.initial,
        bindings=dict(bindings or {}),
        domain_text=domain_text,
        problem_text=problem_text,
    )
    session._dist = goal_distances(policy, graph)
    session.trace.append(_world_fluents(compiled, session.state))
    session.log("start", state=sorted(session.trace[0]), goal=session.done)
    return session


def _outcome_menu(session: Session, action) -> OutcomeMenu:
    names = session.compiled.task.fluents
    n_world = session.compiled.n_world_fluents
    options = []
    for outcome in action.outcomes:
        added = tuple(sorted(names[i] for i in outcome.add if i < n_world))
        options.append(added)
    return OutcomeMenu(action=action.name, options=tuple(options))


def _choose(session: Session, action, outcomes: list[State], choice: int | None) -> int:
    if len(outcomes) == 1:
        return 0
    if choice is not None:
        if not 0 <= choice < len(outcomes):
            raise ExecutorError(
                f"outcome choice {choice} out of range for {action.name}"
            )
        return choice
    key = (session.state, action.name)
    session._visits[key] = session._visits.get(key, 0) + 1
    if session._visits[key] > session.fairness:
        here = session._dist.get(session.state)
        k = min(
            range(len(outcomes)),
            key=lambda i: session._dist.get(outcomes[i], len(session.graph.nodes) + 1),
        )
        if here is not None and session._dist.get(outcomes[k], here) >= here:
            raise ExecutorError("fairness budget exhausted without progress")
        return k
    if session.chooser is None:
        raise ExecutorError("interactive session needs an outcome choice")
    try:
        k = session.chooser(action, outcomes)
    except PlannerError as e:
        raise ExecutorError(f"chooser aborted: {e}") from e
    if not 0 <= k < len(outcomes):
        raise ExecutorError(f"chooser returned invalid outcome {k}")
    return k


def step(session: Session, choice: int | None = None) -> TransitionRecord | OutcomeMenu:
    """Apply the next world action (plus follow-up syncs) and advance time."""
    if session.done:
        raise ExecutorError("goal already reached")
    task = session.compiled.task
    name = session.policy.actions.get(session.state)
    if name is None:
        raise ExecutorError("policy has no action for the current state")
    action = next(a for a in task.actions if a.name == name)
    if not task.applicable(session.state, action):
        raise ExecutorError(f"policy action {name} not applicable")
    outcomes = task.successors(session.state, action)
    if session.chooser is None and choice is None and len(outcomes) > 1:
        return _outcome_menu(session, action)
    k = _choose(session, action, outcomes, choice)
    session.state = outcomes[k]

    syncs: list[str] = []
    turn = session.compiled.turn_id
    while turn not in session.state:
        if len(syncs) > len(session.graph.nodes) + 1:
            raise ExecutorError("bookkeeping actions did not restore the world turn")
        sync_name = session.policy.actions.get(session.state)
        if sync_name is None:
            raise ExecutorError("policy has no action for a bookkeeping state")
        sync = next(a for a in task.actions if a.name == sync_name)
        if not task.applicable(session.state, sync):
            raise ExecutorError(f"bookkeeping action {sync_name} not applicable")
        session.state = task.apply(session.state, sync, 0)
        syncs.append(sync_name)

    session.t += 1
    world = _world_fluents(session.compiled, session.state)
    session.trace.append(world)
    record = TransitionRecord(
        action=name,
        outcome_index=k,
        state=world,
        t=session.t,
        goal=session.done,
        sync_actions=tuple(syncs),
    )
    session.transitions.append(record)
    binding = session.bindings.get(_schema_name(name))
    if binding is not None:
        for sub in binding.substeps:
            session.log("activity-substep", action=name, label=binding.label, substep=sub)
    session.log(
        "step", action=name, outcome=k, goal=record.goal,
        state=sorted(world), syncs=list(syncs),
    )
    return record


def run_to_goal(session: Session, max_steps: int | None = None) -> list[TransitionRecord]:
    """Step a non-interactive session until the compiled goal holds."""
    if session.chooser is None:
        raise ExecutorError("interactive sessions must be stepped one at a time")
    budget = max_steps
    if budget is None:
        budget = (session.fairness + 2) * (len(session.graph.nodes) + 1) * 4
    records = []
    while not session.done:
        if len(records) >= budget:
            raise ExecutorError("run exceeded its step budget")
        record = step(session)
        records.append(record)
    return records


def knowledge_base(session: Session) -> frozenset[str]:
    """Current world fluents, bookkeeping stripped."""
    return session.trace[-1]


def replay_check(session: Session) -> bool:
    """Replaying recorded (action, outcome) pairs reproduces the stored trace."""
    task = session.compiled.task
    state = task.initial
    traces = [_world_fluents(session.compiled, state)]
    for record in session.transitions:
        action = next(a for a in task.actions if a.name == record.action)
        state = task.apply(state, action, record.outcome_index)
        for sync_name in record.sync_actions:
            sync = next(a for a in task.actions if a.name == sync_name)
            state = task.apply(state, sync, 0)
        traces.append(_world_fluents(session.compiled, state))
    return traces == session.trace and state == session.state


def event_lines(session: Session) -> str:
    """Event log as line-delimited JSON."""
    return "\n".join(json.dumps(e, sort_keys=True) for e in session.events) + "\n"


def policy_text(session: Session) -> str:
    """Human-readable policy listing for prompts: world actions only."""
    lines = []
    for state, name in session.policy.actions.items():
        if session.compiled.is_world_action(name):
            lines.append(f"{state_key(session.compiled.task, state)[:12]}: {name}")
    if not lines:
        return "(empty policy: the activity is already satisfied)"
    return "\n".join(sorted(lines))
