"""Sentence/formula dataset generation and the extraction-accuracy harness.

Sentences are built from per-pattern surface templates whose slots are
filled with landmark aliases, so every sentence carries its own ground
truth: the referring expressions that fill the slots and the pattern
template instantiated with the matching landmark identifiers. Accuracy is
judged by automaton language equivalence, never by string comparison.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

from ..llmclient import ClientError
from ..ltlf import Formula, atoms, dfa_equivalent, pretty, to_dfa
from .alphabet import SymbolAlphabet
from .patterns import NAV_FAMILY, PATTERNS, instantiate
from .pipeline import (
    PROFILE_NAMES,
    PipelineConfig,
    TranslationError,
    translate_sentence,
)

SURFACE_TEMPLATES: dict[str, tuple[str, ...]] = {
    "visit": (
        "visit {0}",
        "go to {0}",
        "reach {0}",
        "move to {0}",
        "head to {0}",
        "please visit {0}",
    ),
    "sequenced_visit": (
        "visit {0} then {1}",
        "visit {0} then visit {1}",
        "visit {0} and then visit {1}",
        "go to {0} and then go to {1}",
    ),
    "ordered_visit": (
        "visit {0} before {1}",
        "visit {0} before visiting {1}",
        "go to {0} before going to {1}",
        "reach {0} before reaching {1}",
    ),
    "strict_ordered_visit": (
        "visit {0} strictly before {1}",
        "visit {0} strictly before visiting {1}",
        "go to {0} strictly before going to {1}",
    ),
    "global_avoidance": (
        "never {0}",
        "avoid {0} at all times",
        "always avoid {0}",
    ),
    "bound_delay": (
        "you cannot {0} without {1} right before and you cannot {1} without {0} right after that",
        "you cannot {0} without {1} right before and you cannot {1} without {0} right after",
    ),
    "delayed_reaction": (
        "whenever {0}, eventually {1}",
        "if {0} then eventually {1}",
        "every time {0}, eventually {1}",
    ),
    "prompt_reaction": (
        "whenever {0}, immediately {1}",
        "if {0} then immediately {1}",
        "every time {0}, immediately {1}",
    ),
    "wait": (
        "keep {0} until {1}",
        "hold {0} until {1}",
        "{0} until {1}",
    ),
    "past_avoidance": (
        "no {0} before {1}",
        "avoid {0} until {1}",
        "do not {0} before {1}",
    ),
    "future_avoidance": (
        "after {0}, never {1}",
        "once {0}, avoid {1} forever",
        "once {0}, never {1} again",
    ),
}


@dataclass(frozen=True)
class DatasetPair:
    sentence: str
    formula: Formula
    pattern: str
    expressions: tuple[str, ...]
    task_class: str

    def __post_init__(self):
        if self.task_class not in ("navigation", "generic"):
            raise ValueError(f"unknown task class {self.task_class!r}")


def _phrase_pools(alphabet: SymbolAlphabet, identifiers) -> dict[str, tuple[str, ...]]:
    pools = {}
    for ident in identifiers:
        lm = alphabet.landmark(ident)
        pools[ident] = lm.aliases or (ident.replace("_", " "),)
    return pools


def generate_dataset(
    alphabet: SymbolAlphabet,
    patterns=None,
    n_per_pattern: int = 50,
    generic_per_pattern: int = 43,
    seed: int = 0,
) -> tuple[DatasetPair, ...]:
    """Deterministic corpus: navigation patterns range over locations,
    the remaining patterns over conditions and actions."""
    names = tuple(patterns) if patterns else tuple(PATTERNS)
    unknown = [n for n in names if n not in PATTERNS]
    if unknown:
        raise ValueError(f"unknown patterns {unknown}")
    if n_per_pattern < 1 or generic_per_pattern < 1:
        raise ValueError("need at least one sentence per pattern")

    rng = random.Random(seed)
    generic_symbols = alphabet.conditions + alphabet.actions
    pairs: list[DatasetPair] = []
    for name in names:
        spec = PATTERNS[name]
        nav = name in NAV_FAMILY
        symbols = alphabet.locations if nav else generic_symbols
        if len(symbols) < spec.arity:
            raise ValueError(
                f"alphabet offers {len(symbols)} symbols, pattern {name} needs {spec.arity}"
            )
        pools = _phrase_pools(alphabet, symbols)
        count = n_per_pattern if nav else generic_per_pattern
        for _ in range(count):
            chosen = tuple(rng.sample(symbols, spec.arity))
            phrases = tuple(rng.choice(pools[ident]) for ident in chosen)
            template = rng.choice(SURFACE_TEMPLATES[name])
            pairs.append(DatasetPair(
                sentence=template.format(*phrases),
                formula=instantiate(name, chosen),
                pattern=name,
                expressions=phrases,
                task_class="navigation" if nav else "generic",
            ))
    return tuple(pairs)


def dataset_tsv(pairs) -> str:
    return "\n".join(f"{p.sentence}\t{pretty(p.formula)}" for p in pairs)


# -- accuracy harness ----------------------------------------------------------


@dataclass(frozen=True)
class ClassAccuracy:
    task_class: str
    total: int
    correct: int

    @property
    def accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0


@dataclass(frozen=True)
class ExtractionReport:
    profile: str
    by_class: tuple[ClassAccuracy, ...]
    errors: int

    def accuracy(self, task_class: str) -> float:
        for row in self.by_class:
            if row.task_class == task_class:
                return row.accuracy
        raise KeyError(task_class)


def _with_rer_oracle(config: PipelineConfig, pairs) -> PipelineConfig:
    """Mock backends answer RER from a table; attach this dataset's truth."""
    if not config.backend.kind.startswith("mock-"):
        return config
    table = dict(config.backend.rer_table)
    table.update({p.sentence: p.expressions for p in pairs})
    return replace(config, backend=replace(config.backend, rer_table=table))


def _formulas_equivalent(got: Formula, want: Formula) -> bool:
    alphabet = atoms(got) | atoms(want)
    return dfa_equivalent(to_dfa(got, alphabet), to_dfa(want, alphabet))


def evaluate_extraction(dataset, config: PipelineConfig) -> ExtractionReport:
    config = _with_rer_oracle(config, dataset)
    totals = {"navigation": 0, "generic": 0}
    correct = {"navigation": 0, "generic": 0}
    errors = 0
    for pair in dataset:
        totals[pair.task_class] += 1
        try:
            result = translate_sentence(pair.sentence, config)
        except (TranslationError, ClientError):
            errors += 1
            continue
        if _formulas_equivalent(result.formula, pair.formula):
            correct[pair.task_class] += 1
    return ExtractionReport(
        profile=config.profile,
        by_class=tuple(
            ClassAccuracy(task_class=c, total=totals[c], correct=correct[c])
            for c in ("navigation", "generic")
        ),
        errors=errors,
    )


def evaluate_profiles(
    dataset, base_config: PipelineConfig, profiles=PROFILE_NAMES
) -> tuple[ExtractionReport, ...]:
    return tuple(
        evaluate_extraction(dataset, replace(base_config, profile=name))
        for name in profiles
    )


def format_extraction_table(reports) -> str:
    """One row per prompt profile, one accuracy column per task class."""
    lines = [f"{'profile':<22} {'navigation':>11} {'generic':>11}"]
    for report in reports:
        nav = report.accuracy("navigation") * 100
        gen = report.accuracy("generic") * 100
        lines.append(f"{report.profile:<22} {nav:>10.1f}% {gen:>10.1f}%")
    return "\n".join(lines)
