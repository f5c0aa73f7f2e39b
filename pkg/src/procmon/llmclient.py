"""Transport layer for language-model chat and embedding backends.

Callers own prompt assembly; this module only moves requests. Prompts use
labeled sections ("== name ==" on its own line) so the deterministic mock
backends can read the ground truth a prompt carries: the knowledge-base
section in answering mode, the sentence section in fluent-extraction mode,
the sentence in referring-expression mode. Every mock is a pure function of
(request, seed, attached ground truth); randomness is derived by hashing the
seed with the full request text, so identical calls give identical replies.

The http backend speaks the common chat-completions JSON shape:
POST {endpoint}/chat/completions
  {"model": ..., "messages": [{"role": "system"|"user", "content": ...}],
   "temperature": ..., "max_tokens": ...}
-> {"choices": [{"message": {"content": ...}}], "usage": {...}}
and POST {endpoint}/embeddings {"model": ..., "input": [text]}
-> {"data": [{"embedding": [...]}]}.
The API key comes from an environment variable and is never logged.
"""

from __future__ import annotations

import hashlib
import logging
import os
import random
import re
import time
from dataclasses import dataclass, field

log = logging.getLogger(__name__)

SECTION_QUESTION = "== question =="
SECTION_POLICY = "== policy =="
SECTION_DOMAIN = "== domain =="
SECTION_PROBLEM = "== problem =="
SECTION_KNOWLEDGE = "== knowledge base =="
SECTION_EXTRACT = "== extract fluents =="
SECTION_SENTENCE = "== sentence =="
SECTION_FLUENTS = "== admissible fluents =="
SECTION_OBJECTS = "== admissible objects =="
SECTION_RER = "== find referring expressions =="
SECTION_TRANSLATE = "== translate to ltlf =="
SECTION_EXAMPLES = "== examples =="

ANSWER_FRAME = "Based on my current knowledge these facts hold: "

_KINDS = {
    "http-chat", "mock-oracle", "mock-lossy", "mock-hallucinating", "mock-scripted",
}


class ClientError(RuntimeError):
    def __init__(self, message: str, retries: int = 0):
        super().__init__(message)
        self.retries = retries


@dataclass(frozen=True)
class ChatRequest:
    system: str
    user: str
    temperature: float = 1e-7
    max_tokens: int = 1024

    def __post_init__(self):
        if not self.user.strip():
            raise ValueError("empty request text")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature out of range [0, 2]")


@dataclass(frozen=True)
class ChatResponse:
    text: str
    latency_s: float = 0.0
    prompt_tokens: int | None = None
    completion_tokens: int | None = None
    retries: int = 0


@dataclass(frozen=True)
class BackendConfig:
    """One backend: an http endpoint or one of the deterministic mocks.

    Ground truth for mocks rides along here: `universe` feeds the
    hallucinating mock, `script` maps question text to canned answers,
    `rer_table` maps sentences to their referring-expression spans.
    """

    kind: str = "mock-oracle"
    endpoint: str = ""
    model: str = "default"
    api_key_env: str = "LLM_API_KEY"
    loss_rate: float = 0.0
    hallucination_rate: float = 0.0
    seed: int = 0
    max_retries: int = 3
    universe: tuple[str, ...] = ()
    script: dict[str, str] = field(default_factory=dict)
    rer_table: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if not 0.0 <= self.loss_rate <= 1.0:
            raise ValueError("loss rate out of [0, 1]")
        if not 0.0 <= self.hallucination_rate <= 1.0:
            raise ValueError("hallucination rate out of [0, 1]")


def split_sections(text: str) -> dict[str, str]:
    """Parse '== name ==' headed sections into {name: body}."""
    sections: dict[str, str] = {}
    current = None
    lines: list[str] = []
    for line in text.splitlines():
        m = re.fullmatch(r"== (.+) ==", line.strip())
        if m:
            if current is not None:
                sections[current] = "\n".join(lines).strip()
            current = m.group(1)
            lines = []
        else:
            lines.append(line)
    if current is not None:
        sections[current] = "\n".join(lines).strip()
    return sections


def _mock_rng(config: BackendConfig, request: ChatRequest) -> random.Random:
    digest = hashlib.sha256(
        f"{config.seed}\x1f{request.system}\x1f{request.user}".encode()
    ).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def _fluent_lines(body: str) -> list[str]:
    return [ln.strip() for ln in body.splitlines() if ln.strip().startswith("(")]


def _sentence_fluents(sentence: str) -> list[str]:
    seen = []
    for span in re.findall(r"\([^()]*\)", sentence):
        if span not in seen:
            seen.append(span)
    return seen


def chat(request: ChatRequest, config: BackendConfig) -> ChatResponse:
    if config.kind == "http-chat":
        return _http_chat(request, config)
    started = time.monotonic()
    text = _mock_chat(request, config)
    return ChatResponse(text=text, latency_s=time.monotonic() - started)


def _mock_chat(request: ChatRequest, config: BackendConfig) -> str:
    prompt = f"{request.system}\n{request.user}"
    sections = split_sections(prompt)
    rng = _mock_rng(config, request)

    if "find referring expressions" in sections:
        sentence = sections.get("sentence", "").strip()
        spans = config.rer_table.get(sentence)
        if spans is None:
            raise ClientError(
                f"mock backend has no referring-expression entry for {sentence!r}"
            )
        return "\n".join(spans)

    if "extract fluents" in sections:
        sentence = sections.get("sentence", "").strip()
        if config.kind == "mock-scripted" and sentence in config.script:
            return config.script[sentence]
        return "\n".join(_sentence_fluents(sentence))

    if "translate to ltlf" in sections:
        sentence = sections.get("sentence", "").strip()
        if config.kind == "mock-scripted" and sentence in config.script:
            return config.script[sentence]
        raise ClientError(f"mock backend cannot translate {sentence!r}")

    if config.kind == "mock-scripted":
        question = sections.get("question", request.user).strip()
        if question not in config.script:
            raise ClientError(f"no scripted answer for question {question!r}")
        return config.script[question]

    facts = _fluent_lines(sections.get("knowledge base", ""))
    if config.kind == "mock-lossy":
        facts = [f for f in facts if rng.random() >= config.loss_rate]
    elif config.kind == "mock-hallucinating":
        have = set(facts)
        extras = [
            f for f in config.universe
            if f not in have and rng.random() < config.hallucination_rate
        ]
        facts = facts + extras
    if not facts:
        return ANSWER_FRAME.rstrip(": ") + ": nothing is known."
    return ANSWER_FRAME + ", ".join(facts) + "."


def _base_url(config: BackendConfig) -> str:
    base = config.endpoint or os.environ.get("LLM_BASE_URL", "")
    if not base:
        raise ClientError("no endpoint configured (set endpoint or LLM_BASE_URL)")
    return base.rstrip("/")


def _http_chat(request: ChatRequest, config: BackendConfig) -> ChatResponse:
    import httpx

    key = os.environ.get(config.api_key_env, "")
    headers = {"Content-Type": "application/json"}
    if key:
        headers["Authorization"] = f"Bearer {key}"
    body = {
        "model": config.model,
        "messages": [
            {"role": "system", "content": request.system},
            {"role": "user", "content": request.user},
        ],
        "temperature": request.temperature,
        "max_tokens": request.max_tokens,
    }
    url = _base_url(config) + "/chat/completions"
    log.debug("chat request to %s: %s", url, body)
    started = time.monotonic()
    last = "no attempt made"
    for attempt in range(config.max_retries + 1):
        if attempt:
            time.sleep(min(8.0, 0.5 * 2 ** (attempt - 1)))
        try:
            resp = httpx.post(url, json=body, headers=headers, timeout=60.0)
        except httpx.HTTPError as e:
            last = f"transport error: {e}"
            log.debug("chat attempt %d failed: %s", attempt, last)
            continue
        if resp.status_code == 429 or resp.status_code >= 500:
            last = f"status {resp.status_code}"
            log.debug("chat attempt %d got retryable %s", attempt, last)
            continue
        if resp.status_code != 200:
            raise ClientError(
                f"chat backend returned {resp.status_code}: {resp.text[:200]}",
                retries=attempt,
            )
        data = resp.json()
        log.debug("chat response: %s", data)
        usage = data.get("usage", {})
        return ChatResponse(
            text=data["choices"][0]["message"]["content"],
            latency_s=time.monotonic() - started,
            prompt_tokens=usage.get("prompt_tokens"),
            completion_tokens=usage.get("completion_tokens"),
            retries=attempt,
        )
    raise ClientError(
        f"chat backend failed after {config.max_retries} retries ({last})",
        retries=config.max_retries,
    )


EMBED_DIM = 64

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def embed(text: str, config: BackendConfig) -> list[float]:
    """Embedding vector; the mock is a bag of hashed tokens over 64 buckets."""
    if not text.strip():
        raise ValueError("empty text")
    if config.kind == "http-chat":
        return _http_embed(text, config)
    vec = [0.0] * EMBED_DIM
    for token in _TOKEN_RE.findall(text.lower()):
        h = hashlib.sha256(token.encode()).digest()
        vec[int.from_bytes(h[:4], "big") % EMBED_DIM] += 1.0
    return vec


def _http_embed(text: str, config: BackendConfig) -> list[float]:
    import httpx

    key = os.environ.get(config.api_key_env, "")
    headers = {"Content-Type": "application/json"}
    if key:
        headers["Authorization"] = f"Bearer {key}"
    url = _base_url(config) + "/embeddings"
    for attempt in range(config.max_retries + 1):
        if attempt:
            time.sleep(min(8.0, 0.5 * 2 ** (attempt - 1)))
        try:
            resp = httpx.post(
                url, json={"model": config.model, "input": [text]},
                headers=headers, timeout=60.0,
            )
        except httpx.HTTPError:
            continue
        if resp.status_code == 429 or resp.status_code >= 500:
            continue
        if resp.status_code != 200:
            raise ClientError(
                f"embedding backend returned {resp.status_code}", retries=attempt
            )
        return resp.json()["data"][0]["embedding"]
    raise ClientError(
        f"embedding backend failed after {config.max_retries} retries",
        retries=config.max_retries,
    )


def cosine(a: list[float], b: list[float]) -> float:
    dot = sum(x * y for x, y in zip(a, b))
    na = sum(x * x for x in a) ** 0.5
    nb = sum(y * y for y in b) ** 0.5
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / (na * nb)
