"""Three-phase translation from instruction sentences to grounded formulas.

Phase 1 finds the sub-phrases of the sentence that name domain concepts
(referring expressions), prompted with a profile of worked examples. Phase 2
replaces those phrases with placeholder letters and reads the temporal
structure of what remains: a deterministic pattern engine first, an optional
language-model fallback after. Phase 3 maps each letter to the landmark
whose surface language matches its phrase best, by embedding similarity when
an embedder is supplied and otherwise by a lexical token-overlap score.
"""

from __future__ import annotations

import importlib.resources
import json
import logging
import re
from dataclasses import dataclass, field
from difflib import SequenceMatcher

from ..llmclient import (
    SECTION_EXAMPLES,
    SECTION_RER,
    SECTION_SENTENCE,
    SECTION_TRANSLATE,
    BackendConfig,
    ChatRequest,
    ClientError,
    chat,
    cosine,
    embed,
)
from ..ltlf import Formula, LtlfSyntaxError, atoms, parse, rename_atoms
from .alphabet import Landmark, parse_landmarks
from .patterns import instantiate

log = logging.getLogger(__name__)

RER_SYSTEM = (
    "You find the sub-phrases of an instruction that name domain concepts: "
    "places to be, conditions to observe, actions to perform. Reply with one "
    "sub-phrase per line, each copied verbatim from the sentence."
)
TRANSLATE_SYSTEM = (
    "You translate symbolic instruction sentences into linear temporal logic "
    "over finite traces. Reply with a single formula over the placeholder "
    "letters and nothing else."
)

PROFILE_NAMES = ("vanilla-16", "augmented-34-11sym", "augmented-34-18sym")

_LETTERS = "abcdefghijklmnopqrstuvwxyz"
_WORD_RE = re.compile(r"[a-z0-9]+")


class TranslationError(ValueError):
    pass


class UnresolvedSymbolError(TranslationError):
    def __init__(self, expression: str, candidates: list[tuple[str, float]]):
        listing = ", ".join(f"{ident} ({score:.2f})" for ident, score in candidates)
        super().__init__(
            f"no landmark close enough to {expression!r}; nearest: {listing}"
        )
        self.expression = expression
        self.candidates = candidates


def fixture_text(name: str) -> str:
    return (importlib.resources.files("procmon") / "fixtures" / name).read_text()


def load_landmarks() -> tuple[Landmark, ...]:
    return parse_landmarks(fixture_text("vineyard-landmarks.txt"))


def oracle_rer_table() -> dict[str, tuple[str, ...]]:
    """Hand-labeled sentence -> spans table for driving mock backends."""
    table = json.loads(fixture_text("rer-oracle.json"))
    return {sentence: tuple(spans) for sentence, spans in table.items()}


# -- phase 1: referring expressions ------------------------------------------


@dataclass(frozen=True)
class RerProfile:
    """A named set of worked (sentence, spans) examples for the RER prompt."""

    name: str
    examples: tuple[tuple[str, tuple[str, ...]], ...]

    def __post_init__(self):
        if not self.examples:
            raise ValueError(f"profile {self.name!r} has no examples")

    @property
    def spans(self) -> frozenset[str]:
        return frozenset(s for _, spans in self.examples for s in spans)


def parse_rer_profile(text: str) -> RerProfile:
    name = ""
    examples = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("profile:"):
            name = line.partition(":")[2].strip()
            continue
        sentence, tab, spans = line.partition("\t")
        if not tab:
            raise ValueError(f"malformed profile example (missing tab): {raw!r}")
        examples.append((
            sentence.strip(),
            tuple(s.strip() for s in spans.split(";") if s.strip()),
        ))
    if not name:
        raise ValueError("profile file does not declare a name")
    return RerProfile(name=name, examples=tuple(examples))


def load_profile(name: str) -> RerProfile:
    if name not in PROFILE_NAMES:
        raise ValueError(f"unknown profile {name!r}; have {PROFILE_NAMES}")
    profile = parse_rer_profile(fixture_text(f"rer-{name}.txt"))
    if profile.name != name:
        raise ValueError(f"profile file for {name!r} declares {profile.name!r}")
    return profile


def profile_symbol_coverage(
    profile: RerProfile, landmarks: tuple[Landmark, ...]
) -> frozenset[str]:
    """Identifiers whose surface language appears among the profile's spans."""
    spans = {s.lower() for s in profile.spans}
    covered = set()
    for lm in landmarks:
        if any(text.lower() in spans for text in lm.surface_texts):
            covered.add(lm.identifier)
    return frozenset(covered)


@dataclass(frozen=True)
class ReferringExpression:
    text: str
    offset: int

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("empty referring expression")
        if self.offset < 0:
            raise ValueError("negative expression offset")


def _token_pattern(text: str) -> re.Pattern:
    return re.compile(rf"\b{re.escape(text)}\b", re.IGNORECASE)


def recognize_referring_expressions(
    sentence: str,
    profile: RerProfile | str,
    backend: BackendConfig,
) -> tuple[ReferringExpression, ...]:
    if not sentence.strip():
        raise TranslationError("empty sentence")
    if isinstance(profile, str):
        profile = load_profile(profile)
    lines = [
        SECTION_RER,
        "List every sub-phrase of the sentence that names a place to be, a "
        "condition to observe, or an action to perform. One per line, verbatim.",
        SECTION_EXAMPLES,
    ]
    lines += [f"{s} -> {'; '.join(spans)}" for s, spans in profile.examples]
    lines += [SECTION_SENTENCE, sentence]
    response = chat(ChatRequest(system=RER_SYSTEM, user="\n".join(lines)), backend)

    found: list[ReferringExpression] = []
    seen: set[str] = set()
    for raw in response.text.splitlines():
        span = raw.strip().lstrip("-*").strip()
        if not span or span.lower() in seen:
            continue
        m = _token_pattern(span).search(sentence)
        if m is None:
            log.debug("dropping non-verbatim span %r", span)
            continue
        seen.add(span.lower())
        found.append(ReferringExpression(text=span, offset=m.start()))
    if not found:
        raise TranslationError(f"no referring expressions recognized in {sentence!r}")
    return tuple(found)


# -- phase 2: symbolic translation --------------------------------------------


def _stem(token: str) -> str:
    if token.endswith("ing") and len(token) > 5:
        return token[:-3]
    if token.endswith("s") and len(token) > 3:
        return token[:-1]
    return token


def _stems(text: str) -> tuple[str, ...]:
    return tuple(_stem(t) for t in _WORD_RE.findall(text.lower()))


@dataclass(frozen=True)
class PlaceholderAssignment:
    """One placeholder letter and the surface phrases it stands for."""

    symbol: str
    expressions: tuple[str, ...]

    @property
    def representative(self) -> str:
        return self.expressions[0]


def assign_placeholders(
    sentence: str, expressions
) -> tuple[PlaceholderAssignment, ...]:
    """Letter per concept, ordered by first occurrence in the sentence.

    Inflection variants of one phrase ("call..."/"calling...") collapse to a
    single letter, so the mapping is injective on concepts, not on strings.
    """
    located = []
    for expr in expressions:
        text = expr.text if isinstance(expr, ReferringExpression) else str(expr)
        m = _token_pattern(text).search(sentence)
        if m is None:
            raise TranslationError(f"expression {text!r} does not occur in the sentence")
        located.append((m.start(), -len(text), text))
    located.sort()

    groups: dict[tuple[str, ...], list[str]] = {}
    order: list[tuple[str, ...]] = []
    for _, _, text in located:
        key = _stems(text)
        if key not in groups:
            groups[key] = []
            order.append(key)
        if text not in groups[key]:
            groups[key].append(text)
    if len(order) > len(_LETTERS):
        raise TranslationError("more concepts than placeholder letters")
    return tuple(
        PlaceholderAssignment(symbol=_LETTERS[i], expressions=tuple(groups[key]))
        for i, key in enumerate(order)
    )


def symbolize(sentence: str, assignments: tuple[PlaceholderAssignment, ...]) -> str:
    """Replace every expression occurrence with its placeholder letter.

    One combined pass so replacements cannot cascade into each other;
    longer phrases win where spans nest.
    """
    by_surface = {
        text.lower(): a.symbol for a in assignments for text in a.expressions
    }
    if not by_surface:
        return sentence
    alternation = "|".join(
        re.escape(t) for t in sorted(by_surface, key=len, reverse=True)
    )
    combined = re.compile(rf"\b(?:{alternation})\b", re.IGNORECASE)
    return combined.sub(lambda m: by_surface[m.group(0).lower()], sentence)


def _clean(text: str) -> str:
    return " ".join(re.sub(r"[^a-z0-9]+", " ", text.lower()).split())


@dataclass(frozen=True)
class EngineRule:
    pattern: str
    regex: re.Pattern


_F = r"(?:\w+ )*?"
_V = r"(?:visit|go to|go in|go into|reach|move to|head to|get to|enter)"
_VG = r"(?:visiting|going to|going in|going into|reaching|moving to|heading to|getting to|entering)"
_L = r"([a-z])"


def _rule(pattern: str, expr: str) -> EngineRule:
    return EngineRule(pattern, re.compile(expr))


ENGINE_RULES: tuple[EngineRule, ...] = (
    _rule(
        "bound_delay",
        rf"^you cannot {_F}{_L} without {_F}{_L} right before "
        rf"and you cannot {_F}\2 without {_F}\1 right after(?: that)?$",
    ),
    _rule("strict_ordered_visit", rf"^(?:please )?{_V} {_L} strictly before (?:{_VG} )?{_L}$"),
    _rule("ordered_visit", rf"^(?:please )?{_V} {_L} before (?:{_VG} )?{_L}$"),
    _rule("sequenced_visit", rf"^(?:please )?{_V} {_L}(?: and)? then (?:{_V} |{_VG} )?{_L}$"),
    _rule("visit", rf"^(?:please )?{_V} {_L}$"),
    _rule("global_avoidance", rf"^never {_F}{_L}$"),
    _rule("global_avoidance", rf"^avoid {_L} at all times$"),
    _rule("global_avoidance", rf"^always avoid {_L}$"),
    _rule("delayed_reaction", rf"^whenever {_F}{_L} eventually {_F}{_L}$"),
    _rule("delayed_reaction", rf"^if {_F}{_L} then eventually {_F}{_L}$"),
    _rule("delayed_reaction", rf"^every time {_F}{_L} eventually {_F}{_L}$"),
    _rule("prompt_reaction", rf"^whenever {_F}{_L} immediately {_F}{_L}$"),
    _rule("prompt_reaction", rf"^if {_F}{_L} then immediately {_F}{_L}$"),
    _rule("prompt_reaction", rf"^every time {_F}{_L} immediately {_F}{_L}$"),
    _rule("wait", rf"^(?:keep |stay |hold |remain )?{_L} until {_L}$"),
    _rule("past_avoidance", rf"^no {_F}{_L} before {_F}{_L}$"),
    _rule("past_avoidance", rf"^avoid {_F}{_L} until {_F}{_L}$"),
    _rule("past_avoidance", rf"^do not {_F}{_L} before {_F}{_L}$"),
    _rule("future_avoidance", rf"^after {_F}{_L} never {_F}{_L}$"),
    _rule("future_avoidance", rf"^once {_F}{_L} avoid {_F}{_L} forever$"),
    _rule("future_avoidance", rf"^once {_F}{_L} never {_F}{_L} again$"),
)


@dataclass(frozen=True)
class SymbolicTranslation:
    formula: Formula
    assignments: tuple[PlaceholderAssignment, ...]
    symbolic_sentence: str
    pattern: str | None = None


def symbolic_translate(
    sentence: str,
    expressions,
    backend: BackendConfig | None = None,
) -> SymbolicTranslation:
    assignments = assign_placeholders(sentence, expressions)
    symbolic = symbolize(sentence, assignments)
    cleaned = _clean(symbolic)
    symbols = {a.symbol for a in assignments}
    for rule in ENGINE_RULES:
        m = rule.regex.match(cleaned)
        if m and set(m.groups()) <= symbols:
            return SymbolicTranslation(
                formula=instantiate(rule.pattern, m.groups()),
                assignments=assignments,
                symbolic_sentence=symbolic,
                pattern=rule.pattern,
            )
    if backend is not None:
        return SymbolicTranslation(
            formula=_backend_translate(symbolic, symbols, backend),
            assignments=assignments,
            symbolic_sentence=symbolic,
        )
    raise TranslationError(f"no pattern matched {cleaned!r} and no backend is configured")


def _backend_translate(
    symbolic_sentence: str, symbols: set[str], backend: BackendConfig
) -> Formula:
    user = "\n".join([
        SECTION_TRANSLATE,
        "Reply with one temporal formula over the placeholder letters, nothing else.",
        SECTION_SENTENCE,
        symbolic_sentence,
    ])
    try:
        response = chat(ChatRequest(system=TRANSLATE_SYSTEM, user=user), backend)
    except ClientError as e:
        raise TranslationError(f"translation backend failed: {e}") from e
    text = response.text.strip()
    try:
        formula = parse(text)
    except LtlfSyntaxError as e:
        raise TranslationError(f"backend returned an unparsable formula {text!r}") from e
    extra = atoms(formula) - symbols
    if extra:
        raise TranslationError(f"backend formula uses unknown symbols {sorted(extra)}")
    return formula


# -- phase 3: symbol grounding -------------------------------------------------


@dataclass(frozen=True)
class Grounding:
    formula: Formula
    bindings: dict[str, str]
    scores: dict[str, float]


def _lexical_score(expression: str, landmark: Landmark) -> float:
    tokens = set(_stems(expression))
    best = 0.0
    for surface in landmark.surface_texts:
        other = set(_stems(surface))
        if tokens and other:
            best = max(best, len(tokens & other) / len(tokens | other))
    return best


def _edit_ratio(expression: str, landmark: Landmark) -> float:
    return max(
        SequenceMatcher(None, expression.lower(), s.lower()).ratio()
        for s in landmark.surface_texts
    )


def _rank_landmarks(
    text: str, landmarks: tuple[Landmark, ...], embedder
) -> list[tuple[str, float]]:
    rows = []
    if embedder is not None:
        vec = embedder(text)
        for lm in landmarks:
            score = max(cosine(vec, embedder(s)) for s in lm.surface_texts)
            rows.append((lm.identifier, score, 0.0))
    else:
        for lm in landmarks:
            rows.append((lm.identifier, _lexical_score(text, lm), _edit_ratio(text, lm)))
    rows.sort(key=lambda r: (-r[1], -r[2], r[0]))
    return [(ident, score) for ident, score, _ in rows]


def ground_symbols(
    formula: Formula,
    expressions,
    landmarks: tuple[Landmark, ...],
    embedder=None,
    floor: float = 0.15,
) -> Grounding:
    """Bind each single-letter placeholder to its best-matching landmark.

    `expressions[i]` describes the i-th placeholder in alphabetical order,
    matching how `assign_placeholders` hands letters out.
    """
    placeholders = sorted(a for a in atoms(formula) if len(a) == 1)
    texts = [
        e.text if isinstance(e, ReferringExpression)
        else e.representative if isinstance(e, PlaceholderAssignment)
        else str(e)
        for e in expressions
    ]
    if len(placeholders) != len(texts):
        raise TranslationError(
            f"{len(placeholders)} placeholders but {len(texts)} expressions"
        )
    if not placeholders:
        return Grounding(formula=formula, bindings={}, scores={})
    if not landmarks:
        raise TranslationError("no landmarks to ground against")

    bindings: dict[str, str] = {}
    scores: dict[str, float] = {}
    for letter, text in zip(placeholders, texts):
        ranked = _rank_landmarks(text, landmarks, embedder)
        ident, score = ranked[0]
        if score < floor:
            raise UnresolvedSymbolError(text, ranked[:3])
        bindings[letter] = ident
        scores[letter] = score
    return Grounding(
        formula=rename_atoms(formula, bindings), bindings=bindings, scores=scores
    )


# -- the full pipeline ----------------------------------------------------------


@dataclass(frozen=True)
class PipelineConfig:
    profile: str = "augmented-34-18sym"
    backend: BackendConfig = field(default_factory=BackendConfig)
    landmarks: tuple[Landmark, ...] = ()
    floor: float = 0.15
    translate_fallback: bool = True


@dataclass(frozen=True)
class TranslationResult:
    sentence: str
    expressions: tuple[ReferringExpression, ...]
    symbolic: SymbolicTranslation
    grounding: Grounding

    @property
    def formula(self) -> Formula:
        return self.grounding.formula


def _embedder_for(backend: BackendConfig):
    if backend.kind == "http-chat":
        return lambda text: embed(text, backend)
    return None


def translate_sentence(sentence: str, config: PipelineConfig) -> TranslationResult:
    landmarks = config.landmarks or load_landmarks()
    expressions = recognize_referring_expressions(sentence, config.profile, config.backend)
    symbolic = symbolic_translate(
        sentence,
        expressions,
        backend=config.backend if config.translate_fallback else None,
    )
    grounding = ground_symbols(
        symbolic.formula,
        list(symbolic.assignments),
        landmarks,
        embedder=_embedder_for(config.backend),
        floor=config.floor,
    )
    return TranslationResult(
        sentence=sentence,
        expressions=expressions,
        symbolic=symbolic,
        grounding=grounding,
    )
