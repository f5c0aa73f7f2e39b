"""Closed-loop experiment harness over the plan-execute-ask-score cycle.

Each run determinizes the policy with a per-run seed, executes it to the
goal, and queries once: after the k-th action a query fires with probability
p_k = min(1, start + step * k); if none fired by the end, the final instant
is queried. The sampled question is answered against the knowledge base at
the query instant, the answer is ground back into fluents, and the
prediction is scored over the scenario window of the completed trace.
"""

from __future__ import annotations

import dataclasses
import hashlib
import random
import statistics
from dataclasses import dataclass, field

from ..compiler import compile_task
from ..executor import start_session, step
from ..llmclient import BackendConfig, ClientError
from ..ltlf import parse
from ..pddl import ground, parse_domain, parse_problem
from ..planner import SeededChooser, solve
from .metrics import AnswerEvaluation, Histogram, offset_histogram, score
from .qa import QUESTION_POOLS, ask, extract_fluents, sample_question


@dataclass(frozen=True)
class PSchedule:
    """Query probability after the k-th action: min(1, start + step * k)."""

    start: float = 0.1
    step: float = 0.1

    def __post_init__(self):
        if not 0.0 <= self.start <= 1.0 or self.step < 0.0:
            raise ValueError("schedule parameters out of range")

    def probability(self, k: int) -> float:
        return min(1.0, self.start + self.step * k)


@dataclass(frozen=True)
class ExperimentConfig:
    domain_text: str
    problem_text: str
    goal: str
    atom_map: dict[str, str]
    scenarios: tuple[str, ...] = ("present", "past", "future")
    runs: int = 30
    seed: int = 0
    backend: BackendConfig = field(default_factory=BackendConfig)
    p_schedule: PSchedule = field(default_factory=PSchedule)

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("need at least one run per scenario")
        unknown = set(self.scenarios) - set(QUESTION_POOLS)
        if unknown:
            raise ValueError(f"unknown scenarios: {sorted(unknown)}")


@dataclass(frozen=True)
class RunRecord:
    scenario: str
    run: int
    t: int
    final: int
    question: str
    answer: str
    predicted: tuple[str, ...]
    soundness: float | None
    completeness: float | None
    flagged: bool = False
    failed: bool = False
    error: str = ""


@dataclass(frozen=True)
class ScenarioStats:
    scenario: str
    category: str
    runs: int
    failures: int
    mean_soundness: float
    std_soundness: float
    mean_completeness: float
    std_completeness: float


@dataclass(frozen=True)
class ExperimentReport:
    stats: tuple[ScenarioStats, ...]
    records: tuple[RunRecord, ...]
    histogram: Histogram | None


def admissible_vocabulary(domain, problem) -> tuple[tuple[str, ...], tuple[str, ...]]:
    forms = []
    for pred in domain.predicates:
        vars_ = " ".join(f"?var{i + 1}" for i in range(pred.arity))
        forms.append(f"({pred.name} {vars_})" if vars_ else f"({pred.name})")
    objects = tuple(name for name, _ in problem.objects)
    return tuple(forms), objects


def _run_seeds(master: int, scenario: str, run: int) -> tuple[int, int]:
    digest = hashlib.sha256(f"{master}\x1f{scenario}\x1f{run}".encode()).digest()
    return (
        int.from_bytes(digest[:8], "big"),
        int.from_bytes(digest[8:16], "big"),
    )


def run_experiments(config: ExperimentConfig) -> ExperimentReport:
    domain = parse_domain(config.domain_text)
    problem = parse_problem(config.problem_text, domain)
    task = ground(domain, problem)
    compiled = compile_task(task, parse(config.goal), dict(config.atom_map))
    policy = solve(compiled.task)
    forms, objects = admissible_vocabulary(domain, problem)

    records: list[RunRecord] = []
    evaluations: list[AnswerEvaluation] = []
    stats: list[ScenarioStats] = []
    for scenario in config.scenarios:
        succeeded: list[AnswerEvaluation] = []
        failures = 0
        for run in range(config.runs):
            run_seed, draw_seed = _run_seeds(config.seed, scenario, run)
            backend = dataclasses.replace(config.backend, seed=run_seed)
            rng = random.Random(draw_seed)
            session = start_session(
                compiled, policy, SeededChooser(run_seed),
                domain_text=config.domain_text, problem_text=config.problem_text,
            )
            budget = (session.fairness + 2) * (len(session.graph.nodes) + 1) * 4
            try:
                query_t = None
                question = None
                answer = None
                while not session.done:
                    if session.t > budget:
                        raise RuntimeError("run exceeded its step budget")
                    step(session)
                    k = session.t - 1
                    if query_t is None and rng.random() < config.p_schedule.probability(k):
                        query_t = session.t
                        question = sample_question(scenario, rng)
                        answer = ask(session, question, backend)
                if query_t is None:
                    query_t = session.t
                    question = sample_question(scenario, rng)
                    answer = ask(session, question, backend)
                extraction = extract_fluents(answer, forms, objects, backend)
                evaluation = score(
                    extraction.extracted, session.trace, query_t, scenario
                )
            except ClientError as e:
                failures += 1
                records.append(RunRecord(
                    scenario=scenario, run=run, t=0, final=session.t,
                    question=question.text if question else "",
                    answer=answer or "", predicted=(),
                    soundness=None, completeness=None,
                    failed=True, error=str(e),
                ))
                continue
            succeeded.append(evaluation)
            evaluations.append(evaluation)
            records.append(RunRecord(
                scenario=scenario, run=run, t=query_t, final=evaluation.final,
                question=question.text, answer=answer,
                predicted=tuple(sorted(evaluation.predicted)),
                soundness=evaluation.soundness,
                completeness=evaluation.completeness,
                flagged=evaluation.flagged,
            ))
        s_vals = [e.soundness for e in succeeded]
        c_vals = [e.completeness for e in succeeded]
        stats.append(ScenarioStats(
            scenario=scenario,
            category=QUESTION_POOLS[scenario][0],
            runs=len(succeeded),
            failures=failures,
            mean_soundness=statistics.fmean(s_vals) if s_vals else 0.0,
            std_soundness=statistics.pstdev(s_vals) if s_vals else 0.0,
            mean_completeness=statistics.fmean(c_vals) if c_vals else 0.0,
            std_completeness=statistics.pstdev(c_vals) if c_vals else 0.0,
        ))

    histogram = None
    if any(e.scenario in ("past", "future") for e in evaluations):
        histogram = offset_histogram(evaluations)
    return ExperimentReport(
        stats=tuple(stats), records=tuple(records), histogram=histogram
    )


def format_report(report: ExperimentReport) -> str:
    """Three-column table: scenario category, soundness, completeness."""
    header = f"{'question':<38} {'S':>13} {'C':>13} {'runs':>5} {'failed':>6}"
    lines = [header, "-" * len(header)]
    for row in report.stats:
        s = f"{row.mean_soundness:.2f} ± {row.std_soundness:.2f}"
        c = f"{row.mean_completeness:.2f} ± {row.std_completeness:.2f}"
        label = f"\"{row.category}\""
        lines.append(f"{label:<38} {s:>13} {c:>13} {row.runs:>5} {row.failures:>6}")
    return "\n".join(lines)
