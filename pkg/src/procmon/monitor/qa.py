"""Question pools, prompt assembly, and fluent extraction from answers.

The prompt for a monitoring question always carries the same five sections
in the same order: question, policy, domain, problem, knowledge base. The
extraction prompt is a separate fixed layout that asks the backend to ground
an answer sentence against the admissible fluents and objects; whatever the
backend proposes is post-filtered so only well-formed groundings survive.
"""

from __future__ import annotations

import logging
import random
import re
from dataclasses import dataclass

from ..executor import Session, knowledge_base, policy_text
from ..llmclient import (
    SECTION_DOMAIN,
    SECTION_EXTRACT,
    SECTION_FLUENTS,
    SECTION_KNOWLEDGE,
    SECTION_OBJECTS,
    SECTION_POLICY,
    SECTION_PROBLEM,
    SECTION_QUESTION,
    SECTION_SENTENCE,
    BackendConfig,
    ChatRequest,
    chat,
)

log = logging.getLogger(__name__)

ANSWER_SYSTEM = (
    "You are a robot executing the plan below. Answer the operator's question "
    "truthfully, grounded in the knowledge base of facts that currently hold."
)
EXTRACT_SYSTEM = (
    "You turn a robot's answer into grounded fluents. Reply with one fluent "
    "per line, each a parenthesized predicate applied to admissible objects. "
    "Use only the admissible fluent forms and objects given."
)

QUESTION_POOLS: dict[str, tuple[str, ...]] = {
    "present": (
        "What are you doing now?",
        "What is the current state of the world?",
        "Where are you right now?",
        "Which facts hold at this moment?",
        "Describe the situation you observe now.",
        "What is true in the environment right now?",
    ),
    "past": (
        "What did you do so far?",
        "Which actions have you already completed?",
        "What happened before now?",
        "Describe the states you passed through.",
        "What was true earlier in the run?",
        "How did the world change since the start?",
    ),
    "future": (
        "What are you going to do next?",
        "What is your next action and why?",
        "Which states will you reach from here?",
        "What will be true at the end of the plan?",
        "Describe the remaining steps of your plan.",
        "How will the world change going forward?",
    ),
}


@dataclass(frozen=True)
class Question:
    scenario: str
    text: str
    sampled: bool = False

    def __post_init__(self):
        if self.scenario not in QUESTION_POOLS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if not self.text.strip():
            raise ValueError("empty question")


def sample_question(scenario: str, rng: random.Random) -> Question:
    pool = QUESTION_POOLS[scenario]
    return Question(scenario=scenario, text=rng.choice(pool), sampled=True)


def ask(session: Session, question: Question, backend: BackendConfig) -> str:
    """Answer a monitoring question against the session's current state."""
    kb = sorted(knowledge_base(session))
    user = "\n".join([
        SECTION_QUESTION,
        question.text,
        SECTION_POLICY,
        policy_text(session),
        SECTION_DOMAIN,
        session.domain_text or "(domain text unavailable)",
        SECTION_PROBLEM,
        session.problem_text or "(problem text unavailable)",
        SECTION_KNOWLEDGE,
        *kb,
    ])
    response = chat(ChatRequest(system=ANSWER_SYSTEM, user=user), backend)
    return response.text


@dataclass(frozen=True)
class FluentExtraction:
    sentence: str
    admissible_fluents: tuple[str, ...]
    admissible_objects: tuple[str, ...]
    extracted: frozenset[str]
    dropped: tuple[str, ...] = ()

    @property
    def empty(self) -> bool:
        return not self.extracted


_CANDIDATE_RE = re.compile(r"\([^()]*\)")


def _admissible_forms(fluents: tuple[str, ...]) -> set[tuple[str, int]]:
    forms = set()
    for f in fluents:
        parts = f.strip("()").split()
        if not parts:
            continue
        forms.add((parts[0], len(parts) - 1))
    return forms


def extract_fluents(
    sentence: str,
    fluents: tuple[str, ...],
    objects: tuple[str, ...],
    backend: BackendConfig,
) -> FluentExtraction:
    """Ground an answer sentence into the admissible fluent universe."""
    if not fluents:
        raise ValueError("no admissible fluents")
    if not objects:
        raise ValueError("no admissible objects")
    user = "\n".join([
        SECTION_EXTRACT,
        "",
        SECTION_SENTENCE,
        sentence,
        SECTION_FLUENTS,
        *fluents,
        SECTION_OBJECTS,
        *objects,
    ])
    response = chat(ChatRequest(system=EXTRACT_SYSTEM, user=user), backend)
    forms = _admissible_forms(fluents)
    admissible_objects = set(objects)
    kept: list[str] = []
    dropped: list[str] = []
    for candidate in _CANDIDATE_RE.findall(response.text):
        parts = candidate.strip("()").split()
        if not parts:
            dropped.append(candidate)
            continue
        name, args = parts[0], parts[1:]
        well_formed = (
            (name, len(args)) in forms
            and all(a in admissible_objects for a in args)
        )
        if well_formed:
            canonical = f"({' '.join(parts)})"
            if canonical not in kept:
                kept.append(canonical)
        else:
            dropped.append(candidate)
    if dropped:
        log.info("dropped %d malformed fluent candidates: %s", len(dropped), dropped)
    return FluentExtraction(
        sentence=sentence,
        admissible_fluents=tuple(fluents),
        admissible_objects=tuple(objects),
        extracted=frozenset(kept),
        dropped=tuple(dropped),
    )
