"""Backend client tests: mock determinism, noise statistics, http retries."""

from __future__ import annotations

import time

import httpx
import pytest

from procmon.llmclient import (
    ANSWER_FRAME,
    SECTION_EXTRACT,
    SECTION_FLUENTS,
    SECTION_KNOWLEDGE,
    SECTION_OBJECTS,
    SECTION_QUESTION,
    SECTION_RER,
    SECTION_SENTENCE,
    BackendConfig,
    ChatRequest,
    ChatResponse,
    ClientError,
    chat,
    cosine,
    embed,
    split_sections,
)

FACTS = [
    "(robot-at l0)",
    "(grape-at g1 l1)",
    "(grape-at g2 l2)",
    "(unchecked g1)",
    "(unchecked g2)",
    "(box-empty)",
]


def ask_prompt(question: str, facts=tuple(FACTS)) -> ChatRequest:
    user = "\n".join([
        SECTION_QUESTION,
        question,
        SECTION_KNOWLEDGE,
        *facts,
    ])
    return ChatRequest(system="You monitor a robot.", user=user)


class TestRequestValidation:
    def test_temperature_default_is_near_zero(self):
        req = ChatRequest(system="s", user="u")
        assert req.temperature == 1e-7

    def test_empty_user_text_rejected(self):
        with pytest.raises(ValueError):
            ChatRequest(system="s", user="   ")

    def test_rates_bounded(self):
        with pytest.raises(ValueError):
            BackendConfig(kind="mock-lossy", loss_rate=1.5)
        with pytest.raises(ValueError):
            BackendConfig(kind="mock-hallucinating", hallucination_rate=-0.1)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            BackendConfig(kind="gpt-magic")


class TestSections:
    def test_round_trip(self):
        text = "\n".join([
            SECTION_QUESTION, "Where are you?",
            SECTION_KNOWLEDGE, "(robot-at l0)", "(box-empty)",
        ])
        got = split_sections(text)
        assert got["question"] == "Where are you?"
        assert got["knowledge base"] == "(robot-at l0)\n(box-empty)"

    def test_preamble_before_first_header_ignored(self):
        got = split_sections("hello\n" + SECTION_QUESTION + "\nq")
        assert got == {"question": "q"}


class TestOracleMock:
    def test_answer_lists_exactly_the_known_facts(self):
        resp = chat(ask_prompt("What is the state?"), BackendConfig(kind="mock-oracle"))
        assert resp.text.startswith(ANSWER_FRAME)
        body = resp.text[len(ANSWER_FRAME):].rstrip(".")
        assert body.split(", ") == FACTS

    def test_deterministic(self):
        req = ask_prompt("What now?")
        cfg = BackendConfig(kind="mock-oracle", seed=7)
        assert chat(req, cfg).text == chat(req, cfg).text

    def test_empty_knowledge_base(self):
        req = ask_prompt("What holds?", facts=())
        resp = chat(req, BackendConfig(kind="mock-oracle"))
        assert "nothing is known" in resp.text
        assert "(" not in resp.text


class TestScriptedMock:
    def test_returns_answer_verbatim(self):
        cfg = BackendConfig(
            kind="mock-scripted",
            script={"Is the box full?": "No, the box is empty."},
        )
        resp = chat(ask_prompt("Is the box full?"), cfg)
        assert resp.text == "No, the box is empty."

    def test_missing_question_is_an_error(self):
        cfg = BackendConfig(kind="mock-scripted", script={})
        with pytest.raises(ClientError):
            chat(ask_prompt("Anything?"), cfg)


class TestLossyMock:
    def test_only_true_facts_survive(self):
        cfg = BackendConfig(kind="mock-lossy", loss_rate=0.5, seed=3)
        resp = chat(ask_prompt("State?"), cfg)
        kept = [f for f in FACTS if f in resp.text]
        spans = resp.text.count("(")
        assert spans == len(kept)

    def test_drop_rate_matches_binomial_expectation(self):
        # 1000 distinct requests x 6 facts, keep prob 0.7:
        # mean 4200, sigma = sqrt(6000 * 0.21) ~ 35.5, 3 sigma ~ 107
        cfg = BackendConfig(kind="mock-lossy", loss_rate=0.3, seed=11)
        total = 0
        for k in range(1000):
            resp = chat(ask_prompt(f"State at step {k}?"), cfg)
            total += sum(1 for f in FACTS if f in resp.text)
        assert abs(total - 4200) < 110

    def test_zero_rate_is_oracle(self):
        cfg = BackendConfig(kind="mock-lossy", loss_rate=0.0, seed=5)
        oracle = chat(ask_prompt("State?"), BackendConfig(kind="mock-oracle"))
        assert chat(ask_prompt("State?"), cfg).text == oracle.text


class TestHallucinatingMock:
    UNIVERSE = tuple(FACTS) + ("(ripe g1)", "(ripe g2)", "(box-full)", "(support-called)")

    def test_spurious_facts_come_only_from_the_universe(self):
        cfg = BackendConfig(
            kind="mock-hallucinating", hallucination_rate=0.8,
            universe=self.UNIVERSE, seed=2,
        )
        import re
        spurious = set()
        for k in range(200):
            resp = chat(ask_prompt(f"Step {k}?"), cfg)
            mentioned = set(re.findall(r"\([^()]*\)", resp.text))
            assert set(FACTS) <= mentioned
            spurious |= mentioned - set(FACTS)
        assert spurious
        assert spurious <= set(self.UNIVERSE)

    def test_zero_rate_adds_nothing(self):
        cfg = BackendConfig(
            kind="mock-hallucinating", hallucination_rate=0.0,
            universe=self.UNIVERSE, seed=2,
        )
        resp = chat(ask_prompt("State?"), cfg)
        assert resp.text.count("(") == len(FACTS)


class TestExtractionMode:
    def test_mock_parses_fluent_spans_from_sentence(self):
        user = "\n".join([
            SECTION_EXTRACT, "",
            SECTION_SENTENCE,
            "I can see (robot-at l0) and also (box-empty), nothing else.",
            SECTION_FLUENTS, "(robot-at ?var1)", "(box-empty)",
            SECTION_OBJECTS, "l0", "l1",
        ])
        req = ChatRequest(system="extract", user=user)
        resp = chat(req, BackendConfig(kind="mock-oracle"))
        assert resp.text.splitlines() == ["(robot-at l0)", "(box-empty)"]

    def test_round_trip_from_oracle_answer(self):
        answer = chat(ask_prompt("State?"), BackendConfig(kind="mock-oracle")).text
        user = "\n".join([SECTION_EXTRACT, "", SECTION_SENTENCE, answer])
        resp = chat(ChatRequest(system="extract", user=user),
                    BackendConfig(kind="mock-oracle"))
        assert resp.text.splitlines() == FACTS


class TestRerMode:
    def test_spans_come_from_the_attached_table(self):
        table = {"go to the barn": ("the barn",)}
        user = "\n".join([SECTION_RER, "", SECTION_SENTENCE, "go to the barn"])
        resp = chat(ChatRequest(system="rer", user=user),
                    BackendConfig(kind="mock-oracle", rer_table=table))
        assert resp.text == "the barn"

    def test_unknown_sentence_is_an_error(self):
        user = "\n".join([SECTION_RER, "", SECTION_SENTENCE, "fly to the moon"])
        with pytest.raises(ClientError):
            chat(ChatRequest(system="rer", user=user),
                 BackendConfig(kind="mock-oracle"))


class TestEmbedding:
    def test_same_text_same_vector(self):
        cfg = BackendConfig(kind="mock-oracle")
        assert embed("harvest the grapes", cfg) == embed("harvest the grapes", cfg)

    def test_self_cosine_is_one(self):
        cfg = BackendConfig(kind="mock-oracle")
        v = embed("move to location three", cfg)
        assert cosine(v, v) == pytest.approx(1.0)

    def test_disjoint_token_strings_are_dissimilar(self):
        cfg = BackendConfig(kind="mock-oracle")
        a = embed("harvest ripe grapes quickly", cfg)
        b = embed("unload container near depot", cfg)
        assert cosine(a, b) < 0.5

    def test_empty_text_rejected(self):
        with pytest.raises(ValueError):
            embed("   ", BackendConfig(kind="mock-oracle"))


class _FakeResponse:
    def __init__(self, status_code: int, payload=None, text: str = ""):
        self.status_code = status_code
        self._payload = payload or {}
        self.text = text

    def json(self):
        return self._payload


class TestHttpBackend:
    CFG = BackendConfig(kind="http-chat", endpoint="http://model.test/v1", model="m")

    def test_retries_on_429_then_succeeds(self, monkeypatch):
        calls = []

        def fake_post(url, json=None, headers=None, timeout=None):
            calls.append(url)
            if len(calls) < 3:
                return _FakeResponse(429)
            return _FakeResponse(200, {
                "choices": [{"message": {"content": "ok"}}],
                "usage": {"prompt_tokens": 5, "completion_tokens": 1},
            })

        monkeypatch.setattr(httpx, "post", fake_post)
        monkeypatch.setattr(time, "sleep", lambda s: None)
        resp = chat(ChatRequest(system="s", user="u"), self.CFG)
        assert isinstance(resp, ChatResponse)
        assert resp.text == "ok"
        assert resp.retries == 2
        assert resp.prompt_tokens == 5
        assert calls == ["http://model.test/v1/chat/completions"] * 3

    def test_retry_exhaustion_raises(self, monkeypatch):
        monkeypatch.setattr(httpx, "post",
                            lambda *a, **k: _FakeResponse(503))
        monkeypatch.setattr(time, "sleep", lambda s: None)
        with pytest.raises(ClientError) as err:
            chat(ChatRequest(system="s", user="u"), self.CFG)
        assert err.value.retries == 3

    def test_client_error_is_not_retried(self, monkeypatch):
        calls = []

        def fake_post(url, json=None, headers=None, timeout=None):
            calls.append(url)
            return _FakeResponse(401, text="bad key")

        monkeypatch.setattr(httpx, "post", fake_post)
        with pytest.raises(ClientError):
            chat(ChatRequest(system="s", user="u"), self.CFG)
        assert len(calls) == 1

    def test_api_key_header_from_env(self, monkeypatch):
        seen = {}

        def fake_post(url, json=None, headers=None, timeout=None):
            seen.update(headers)
            return _FakeResponse(200, {"choices": [{"message": {"content": "x"}}]})

        monkeypatch.setattr(httpx, "post", fake_post)
        monkeypatch.setenv("LLM_API_KEY", "sk-secret")
        chat(ChatRequest(system="s", user="u"), self.CFG)
        assert seen["Authorization"] == "Bearer sk-secret"

    def test_missing_endpoint_is_an_error(self, monkeypatch):
        monkeypatch.delenv("LLM_BASE_URL", raising=False)
        cfg = BackendConfig(kind="http-chat")
        with pytest.raises(ClientError):
            chat(ChatRequest(system="s", user="u"), cfg)
