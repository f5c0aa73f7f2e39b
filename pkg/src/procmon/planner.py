"""Strong-cyclic planning over the explicit nondeterministic transition graph.

`solve` explores all states reachable from the initial one, then prunes
(state, action) pairs to a joint fixpoint: a pair dies if some outcome leaves
the surviving region (it could strand the robot) or if no goal path remains
within the surviving pairs. Surviving states are layered by distance-to-goal
and each gets the lowest-id action with an outcome in a strictly lower layer,
which makes every policy action either progress or retry toward progress.

`verify_policy` re-checks a policy by brute force, expanding every outcome,
and `determinize` walks one concrete execution, breaking cycles with a
fairness guard that forces a progressing outcome after repeated visits.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass

from .pddl import GroundAction, GroundTask

State = frozenset[int]


class PlannerError(RuntimeError):
    pass


class Unsolvable(PlannerError):
    pass


class PolicyError(PlannerError):
    def __init__(self, message: str, witness: State | None = None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class Policy:
    actions: dict[State, str]  # non-goal reachable state -> ground action name
    tag: str  # "strong" (acyclic) or "strong-cyclic"

    def action_for(self, state: State) -> str | None:
        return self.actions.get(state)


@dataclass(frozen=True)
class PlanGraph:
    initial: State
    nodes: tuple[State, ...]
    edges: dict[tuple[State, str, int], State]
    goals: frozenset[State]

    def outcome_states(self, state: State, action: str) -> list[State]:
        out = []
        k = 0
        while (state, action, k) in self.edges:
            out.append(self.edges[(state, action, k)])
            k += 1
        return out


def state_key(task: GroundTask, state: State) -> str:
    """Stable hash of a state's sorted fluent names."""
    text = "|".join(sorted(task.fluents[f] for f in state))
    return hashlib.sha256(text.encode()).hexdigest()


def _explore(task: GroundTask, max_states: int):
    applicable: dict[State, list[int]] = {}
    succ: dict[tuple[State, int], tuple[State, ...]] = {}
    states: set[State] = {task.initial}
    frontier = [task.initial]
    while frontier:
        s = frontier.pop()
        acts = []
        for ai, a in enumerate(task.actions):
            if not task.applicable(s, a):
                continue
            acts.append(ai)
            outs = tuple(task.apply(s, a, k) for k in range(len(a.outcomes)))
            succ[(s, ai)] = outs
            for t in outs:
                if t not in states:
                    if len(states) >= max_states:
                        raise PlannerError(
                            f"state-space cap of {max_states} states exceeded"
                        )
                    states.add(t)
                    frontier.append(t)
        applicable[s] = acts
    return states, applicable, succ


def solve(task: GroundTask, max_states: int = 200_000) -> Policy:
    """Strong-cyclic policy for the task, or Unsolvable when none exists."""
    states, applicable, succ = _explore(task, max_states)
    goals = {s for s in states if task.is_goal(s)}
    pairs = {
        (s, ai) for s in states if s not in goals for ai in applicable[s]
    }

    while True:
        covered = goals | {s for s, _ in pairs}
        kept = {
            (s, ai) for s, ai in pairs
            if all(t in covered for t in succ[(s, ai)])
        }
        connected: set[State] = set(goals)
        grew = True
        while grew:
            grew = False
            for s, ai in kept:
                if s not in connected and any(
                    t in connected for t in succ[(s, ai)]
                ):
                    connected.add(s)
                    grew = True
        kept = {(s, ai) for s, ai in kept if s in connected}
        if kept == pairs:
            break
        pairs = kept

    if task.initial in goals:
        return Policy({}, "strong")
    winning = {s for s, _ in pairs}
    if task.initial not in winning:
        raise Unsolvable("no strong-cyclic policy reaches the goal")

    # layer states by distance-to-goal; pick the lowest-id progressing action
    level: dict[State, int] = {g: 0 for g in goals}
    chosen: dict[State, int] = {}
    current_level = 0
    while len(level) < len(winning) + len(goals):
        current_level += 1
        newly = {}
        for s, ai in sorted(pairs, key=lambda p: p[1]):
            if s not in level and s not in newly and any(
                t in level for t in succ[(s, ai)]
            ):
                newly[s] = ai
        if not newly:
            raise PlannerError("internal: pruned set not goal-connected")
        for s, ai in newly.items():
            level[s] = current_level
            chosen[s] = ai
    del current_level

    # restrict to states actually reachable under the chosen actions
    actions: dict[State, str] = {}
    frontier = [task.initial]
    seen = {task.initial}
    while frontier:
        s = frontier.pop()
        if s in goals:
            continue
        ai = chosen[s]
        actions[s] = task.actions[ai].name
        for t in succ[(s, ai)]:
            if t not in seen:
                seen.add(t)
                frontier.append(t)

    tag = "strong" if _is_acyclic(task, actions) else "strong-cyclic"
    return Policy(actions, tag)


def _is_acyclic(task: GroundTask, actions: dict[State, str]) -> bool:
    by_name = {a.name: a for a in task.actions}
    color: dict[State, int] = {}  # 1 = on stack, 2 = done
    for root in actions:
        if color.get(root):
            continue
        stack = [(root, 0)]
        while stack:
            s, idx = stack.pop()
            if idx == 0:
                if color.get(s) == 2:
                    continue
                color[s] = 1
            nexts = (
                task.successors(s, by_name[actions[s]]) if s in actions else []
            )
            if idx < len(nexts):
                stack.append((s, idx + 1))
                t = nexts[idx]
                c = color.get(t)
                if c == 1:
                    return False
                if c is None:
                    stack.append((t, 0))
            else:
                color[s] = 2
    return True


def verify_policy(task: GroundTask, policy: Policy) -> PlanGraph:
    """Expand every outcome of every policy action; reject any violation."""
    by_name = {a.name: a for a in task.actions}
    edges: dict[tuple[State, str, int], State] = {}
    goals: set[State] = set()
    nodes: list[State] = []
    seen = {task.initial}
    frontier = [task.initial]
    while frontier:
        s = frontier.pop()
        nodes.append(s)
        if task.is_goal(s):
            goals.add(s)
            if s in policy.actions:
                raise PolicyError("goal state must be unmapped", witness=s)
            continue
        name = policy.actions.get(s)
        if name is None:
            raise PolicyError(
                "policy incomplete: unmapped reachable non-goal state", witness=s
            )
        action = by_name.get(name)
        if action is None:
            raise PolicyError(f"policy uses unknown action {name!r}", witness=s)
        if not task.applicable(s, action):
            raise PolicyError(
                f"precondition of {name} violated in a policy state", witness=s
            )
        for k, t in enumerate(task.successors(s, action)):
            edges[(s, name, k)] = t
            if t not in seen:
                seen.add(t)
                frontier.append(t)

    reaches_goal = set(goals)
    grew = True
    while grew:
        grew = False
        for (s, _, _), t in edges.items():
            if s not in reaches_goal and t in reaches_goal:
                reaches_goal.add(s)
                grew = True
    stranded = [s for s in nodes if s not in reaches_goal]
    if stranded:
        raise PolicyError(
            "goal-unreachable component under policy", witness=stranded[0]
        )
    return PlanGraph(
        initial=task.initial,
        nodes=tuple(nodes),
        edges=edges,
        goals=frozenset(goals),
    )


class SeededChooser:
    """Uniform outcome choice from a seeded generator; deterministic per seed."""

    def __init__(self, seed: int):
        self.seed = seed
        self._rng = random.Random(seed)

    def __call__(self, action: GroundAction, outcomes: list[State]) -> int:
        return self._rng.randrange(len(outcomes))


class ScriptedChooser:
    """Replays outcome indices, or labels matched against added fluents."""

    def __init__(self, script, fluents: tuple[str, ...] = ()):
        self.script = list(script)
        self.fluents = fluents
        self._pos = 0

    def __call__(self, action: GroundAction, outcomes: list[State]) -> int:
        if self._pos >= len(self.script):
            raise PlannerError("outcome script exhausted")
        item = self.script[self._pos]
        self._pos += 1
        if isinstance(item, int):
            if not 0 <= item < len(outcomes):
                raise PlannerError(f"scripted outcome {item} out of range")
            return item
        def matches(fluent_key: str) -> bool:
            return item == fluent_key or item in fluent_key.strip("()").split()

        hits = [
            k for k, o in enumerate(action.outcomes)
            if any(matches(self.fluents[f]) for f in o.add)
        ]
        if len(hits) != 1:
            raise PlannerError(
                f"outcome label {item!r} matches {len(hits)} outcomes of {action.name}"
            )
        return hits[0]


def goal_distances(policy: Policy, graph: PlanGraph) -> dict[State, int]:
    """Optimistic steps-to-goal per state: 1 + min over policy outcomes."""
    dist: dict[State, int] = {g: 0 for g in graph.goals}
    changed = True
    while changed:
        changed = False
        for s in graph.nodes:
            name = policy.actions.get(s)
            if name is None:
                continue
            reachable = [
                dist[t] for t in graph.outcome_states(s, name) if t in dist
            ]
            if reachable:
                d = 1 + min(reachable)
                if d < dist.get(s, d + 1):
                    dist[s] = d
                    changed = True
    return dist


def determinize(
    policy: Policy,
    graph: PlanGraph,
    chooser,
    fairness: int = 3,
    task: GroundTask | None = None,
) -> list[tuple[str, int]]:
    """One concrete goal-reaching run: (action name, outcome index) per step.

    The chooser picks outcomes of nondeterministic actions; after `fairness`
    visits to the same (state, action), the closest-to-goal outcome is forced
    so cycles cannot spin forever. Passing the task lets choosers see the
    real ground actions (label-based scripts need it).
    """
    dist = goal_distances(policy, graph)
    by_name = {a.name: a for a in task.actions} if task else {}
    plan: list[tuple[str, int]] = []
    visits: dict[tuple[State, str], int] = {}
    state = graph.initial
    budget = (fairness + 2) * (len(graph.nodes) + 1) * 4
    while state not in graph.goals:
        if len(plan) > budget:
            raise PlannerError("determinization exceeded its step budget")
        name = policy.actions.get(state)
        if name is None:
            raise PolicyError("reached unmapped state during determinization", witness=state)
        outcomes = graph.outcome_states(state, name)
        action = by_name.get(name) or _GraphAction(name, len(outcomes))
        visits[(state, name)] = visits.get((state, name), 0) + 1
        if len(outcomes) == 1:
            k = 0
        elif visits[(state, name)] > fairness:
            here = dist.get(state)
            k = min(range(len(outcomes)), key=lambda i: dist.get(outcomes[i], len(graph.nodes) + 1))
            if here is not None and dist.get(outcomes[k], here) >= here:
                raise PlannerError("fairness budget exhausted without progress")
        else:
            k = chooser(action, outcomes)
            if not 0 <= k < len(outcomes):
                raise PlannerError(f"chooser returned invalid outcome {k}")
        plan.append((name, k))
        state = outcomes[k]
    return plan


class _GraphAction:
    """Minimal stand-in passed to choosers when no task was provided."""

    def __init__(self, name: str, n_outcomes: int):
        self.name = name
        self.outcomes = tuple(range(n_outcomes))


def save_policy(task: GroundTask, policy: Policy) -> str:
    """Line format: canonical-state-hash TAB action-name, sorted by hash."""
    lines = [f"# policy {policy.tag}"]
    rows = sorted(
        (state_key(task, s), name) for s, name in policy.actions.items()
    )
    lines.extend(f"{h}\t{name}" for h, name in rows)
    return "\n".join(lines) + "\n"


def load_policy(text: str) -> tuple[dict[str, str], str]:
    """Inverse of save_policy: (hash -> action name, tag)."""
    tag = "strong-cyclic"
    table: dict[str, str] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            tag = line.split()[-1]
            continue
        h, _, name = line.partition("\t")
        table[h] = name
    return table, tag
