"""Soundness and completeness of predicted fluent sets against a trace.

For a prediction f-hat and the state f_i at instant i:

    S_i = |f-hat intersect f_i| / |f-hat|
    C_i = |f-hat intersect f_i| / |f_i|

Scenario aggregates average the per-instant values over a window anchored at
the query instant t: the present uses i = t alone, the past averages i =
1..t, the future averages i = t..T. Conventions for the undefined corners:
an empty f-hat asserts nothing false, so S_i = 1 and C_i = 0 (and the
evaluation is flagged); an empty state with a non-empty prediction leaves
nothing to miss, so C_i = 1 while S_i = 0 follows from the equation.

Evaluations are also flagged when the scenario window is degenerate for its
reading (a past query needs 1 <= t < T, a future query 1 < t <= T); values
are still computed.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

log = logging.getLogger(__name__)

SCENARIOS = ("present", "past", "future")


@dataclass(frozen=True)
class OffsetCounts:
    """Fluent classification at one instant, keyed by distance from t."""

    offset: int
    correct: int
    hallucinated: int
    missing: int


@dataclass(frozen=True)
class AnswerEvaluation:
    scenario: str
    t: int
    final: int
    predicted: frozenset[str]
    instants: tuple[int, ...]
    s_values: tuple[float, ...]
    c_values: tuple[float, ...]
    soundness: float
    completeness: float
    offsets: tuple[OffsetCounts, ...]
    flagged: bool
    notes: tuple[str, ...] = ()


def _window(scenario: str, t: int, final: int) -> tuple[int, ...]:
    if scenario == "present":
        return (t,)
    if scenario == "past":
        return tuple(range(1, t + 1))
    return tuple(range(t, final + 1))


def score(
    predicted: frozenset[str] | set[str],
    trace: Sequence[frozenset[str]],
    t: int,
    scenario: str,
) -> AnswerEvaluation:
    if scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario {scenario!r}")
    final = len(trace)
    if final == 0:
        raise ValueError("empty trace")
    if not 1 <= t <= final:
        raise ValueError(f"query instant {t} outside 1..{final}")
    predicted = frozenset(predicted)

    notes: list[str] = []
    if not predicted:
        notes.append("empty prediction")
    if scenario == "past" and not 1 <= t < final:
        notes.append("degenerate past window (needs 1 <= t < T)")
    if scenario == "future" and not 1 < t <= final:
        notes.append("degenerate future window (needs 1 < t <= T)")

    instants = _window(scenario, t, final)
    s_vals: list[Fraction] = []
    c_vals: list[Fraction] = []
    offsets: list[OffsetCounts] = []
    for i in instants:
        state = trace[i - 1]
        hit = len(predicted & state)
        if predicted:
            s_vals.append(Fraction(hit, len(predicted)))
        else:
            s_vals.append(Fraction(1))
        if not predicted:
            c_vals.append(Fraction(0))
        elif not state:
            c_vals.append(Fraction(1))
        else:
            c_vals.append(Fraction(hit, len(state)))
        offsets.append(
            OffsetCounts(
                offset=abs(i - t),
                correct=hit,
                hallucinated=len(predicted - state),
                missing=len(state - predicted),
            )
        )

    n = len(instants)
    return AnswerEvaluation(
        scenario=scenario,
        t=t,
        final=final,
        predicted=predicted,
        instants=instants,
        s_values=tuple(float(v) for v in s_vals),
        c_values=tuple(float(v) for v in c_vals),
        soundness=float(sum(s_vals, Fraction(0)) / n),
        completeness=float(sum(c_vals, Fraction(0)) / n),
        offsets=tuple(offsets),
        flagged=bool(notes),
        notes=tuple(notes),
    )


@dataclass(frozen=True)
class HistogramRow:
    offset: int
    correct: float
    hallucinated: float
    missing: float
    n: int


@dataclass(frozen=True)
class Histogram:
    rows: tuple[HistogramRow, ...]
    warnings: tuple[str, ...] = ()


def offset_histogram(evaluations: Sequence[AnswerEvaluation]) -> Histogram:
    """Aggregate offset classifications across past/future evaluations.

    Correct and missing fractions are normalized by the total ground-truth
    fluent mass at each offset; hallucinated by the total predicted mass.
    """
    temporal = [e for e in evaluations if e.scenario in ("past", "future")]
    if not temporal:
        raise ValueError("need at least one past or future evaluation")
    warnings = []
    usable = []
    for e in temporal:
        if e.scenario == "past" and e.final == 1:
            warnings.append(
                "dropped a past evaluation on a single-state trace (no history)"
            )
            continue
        usable.append(e)
    for w in warnings:
        log.warning("%s", w)

    truth_mass: dict[int, int] = {}
    predicted_mass: dict[int, int] = {}
    correct: dict[int, int] = {}
    hallucinated: dict[int, int] = {}
    missing: dict[int, int] = {}
    samples: dict[int, int] = {}
    for e in usable:
        for oc in e.offsets:
            k = oc.offset
            truth_mass[k] = truth_mass.get(k, 0) + oc.correct + oc.missing
            predicted_mass[k] = predicted_mass.get(k, 0) + oc.correct + oc.hallucinated
            correct[k] = correct.get(k, 0) + oc.correct
            hallucinated[k] = hallucinated.get(k, 0) + oc.hallucinated
            missing[k] = missing.get(k, 0) + oc.missing
            samples[k] = samples.get(k, 0) + 1

    rows = []
    for k in sorted(samples):
        truth = truth_mass[k]
        pred = predicted_mass[k]
        rows.append(
            HistogramRow(
                offset=k,
                correct=correct[k] / truth if truth else 0.0,
                hallucinated=hallucinated[k] / pred if pred else 0.0,
                missing=missing[k] / truth if truth else 0.0,
                n=samples[k],
            )
        )
    return Histogram(rows=tuple(rows), warnings=tuple(warnings))


def histogram_csv(histogram: Histogram) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["offset", "correct", "hallucinated", "missing", "n"])
    for row in histogram.rows:
        writer.writerow([
            row.offset,
            f"{row.correct:.6f}",
            f"{row.hallucinated:.6f}",
            f"{row.missing:.6f}",
            row.n,
        ])
    return out.getvalue()
