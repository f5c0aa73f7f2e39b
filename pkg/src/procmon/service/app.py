"""HTTP face of the pipeline: define, confirm, step, query, experiment.

Sessions walk a monotone phase chain: defined -> translated -> compiled ->
planned -> executing -> done. Every mutating request becomes one command
record in the session store; replaying a session file through the same
apply path restores the session, so a restart loses nothing but in-flight
requests. UI-facing events carry monotone sequence numbers and no
timestamps, which keeps restored streams identical to the originals.
"""

from __future__ import annotations

import hashlib
import random
import threading
import uuid
from dataclasses import dataclass, field, replace

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from ..compiler import CompileError, CompiledTask, compile_task
from ..executor import ExecutorError, OutcomeMenu, Session, start_session
from ..executor import step as exec_step
from ..llmclient import BackendConfig, ClientError
from ..ltlf import Formula, LtlfSyntaxError, atoms, parse, pretty
from ..monitor import (
    QUESTION_POOLS,
    SCENARIOS,
    ExperimentConfig,
    PSchedule,
    Question,
    admissible_vocabulary,
    ask,
    extract_fluents,
    format_report,
    histogram_csv,
    run_experiments,
    sample_question,
    score,
)
from ..nlfront import (
    Landmark,
    PipelineConfig,
    TranslationError,
    UnresolvedSymbolError,
    fixture_text,
    load_landmarks,
    translate_sentence,
)
from ..pddl import GroundingError, PddlSyntaxError, ground, parse_domain, parse_problem
from ..planner import PlannerError, solve, state_key
from .store import SessionStore

PHASES = ("defined", "translated", "compiled", "planned", "executing", "done")


@dataclass(frozen=True)
class ServiceConfig:
    """Everything the app factory needs; immutable so restarts are reproducible."""

    store_dir: str
    backend: BackendConfig = field(default_factory=BackendConfig)
    profile: str = "augmented-34-18sym"
    floor: float = 0.15
    seed: int = 0
    landmarks: tuple[Landmark, ...] = ()
    static_dir: str = ""


class DomainBody(BaseModel):
    domain: str
    problem: str


class SessionBody(BaseModel):
    domain_id: str


class ActivityBody(BaseModel):
    sentence: str | None = None
    formula: str | None = None


class StepBody(BaseModel):
    choice: int | None = None
    auto: bool = False


class QueryBody(BaseModel):
    question: str | None = None
    scenario: str | None = None


class ExperimentBody(BaseModel):
    goal: str
    domain_id: str | None = None
    scenarios: tuple[str, ...] = ("present", "past", "future")
    runs: int = 5
    seed: int = 0
    loss_rate: float = 0.0
    hallucination_rate: float = 0.0


@dataclass
class DomainResource:
    id: str
    domain_text: str
    problem_text: str


@dataclass
class SessionResource:
    id: str
    domain: DomainResource
    phase: str = "defined"
    sentence: str | None = None
    formula: Formula | None = None
    artifacts: dict = field(default_factory=dict)
    compiled: CompiledTask | None = None
    exec_session: Session | None = None
    events: list[dict] = field(default_factory=list)
    seq: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)

    def emit(self, event: str, **payload) -> None:
        self.seq += 1
        self.events.append({"seq": self.seq, "event": event, **payload})


def _fail(status: int, code: str, message: str, **extra):
    raise HTTPException(status, detail={"code": code, "message": message, **extra})


def create_app(config: ServiceConfig) -> FastAPI:
    app = FastAPI(title="procmon")
    if config.static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=config.static_dir, html=True), name="ui")
    store = SessionStore(config.store_dir)
    landmarks = config.landmarks or load_landmarks()
    atom_map = {lm.identifier: lm.binds for lm in landmarks if lm.binds}
    domains: dict[str, DomainResource] = {}
    sessions: dict[str, SessionResource] = {}
    registry_lock = threading.Lock()

    def _domain_or_404(domain_id: str) -> DomainResource:
        dom = domains.get(domain_id)
        if dom is None:
            _fail(404, "unknown-domain", f"no domain {domain_id!r}")
        return dom

    def _session_or_404(session_id: str) -> SessionResource:
        resource = sessions.get(session_id)
        if resource is None:
            _fail(404, "unknown-session", f"no session {session_id!r}")
        return resource

    def _require_phase(resource: SessionResource, allowed: tuple[str, ...]) -> None:
        if resource.phase not in allowed:
            _fail(
                409,
                "wrong-phase",
                f"operation valid in phases {list(allowed)}, session is {resource.phase}",
                phase=resource.phase,
            )

    def _advance(resource: SessionResource, phase: str) -> None:
        # Monotone by construction; a backward move is a server bug, not a 4xx.
        if PHASES.index(phase) < PHASES.index(resource.phase):
            raise RuntimeError(
                f"phase may not move back from {resource.phase} to {phase}"
            )
        resource.phase = phase

    def _register_domain(domain_text: str, problem_text: str, persist: bool) -> DomainResource:
        try:
            domain = parse_domain(domain_text)
            parse_problem(problem_text, domain)
        except PddlSyntaxError as e:
            _fail(400, "parse-error", str(e))
        digest = hashlib.sha256(f"{domain_text}\x1f{problem_text}".encode()).hexdigest()
        dom = DomainResource(digest[:12], domain_text, problem_text)
        with registry_lock:
            known = domains.get(dom.id)
            if known is not None:
                return known
            domains[dom.id] = dom
        if persist:
            store.append_domain(
                {"id": dom.id, "domain": domain_text, "problem": problem_text}
            )
        return dom

    def _translate(resource: SessionResource, sentence: str | None,
                   formula_text: str | None) -> dict:
        """Turn the request into replayable activity artifacts."""
        if (sentence is None) == (formula_text is None):
            _fail(400, "bad-activity", "provide exactly one of sentence or formula",
                  phase=resource.phase)
        if formula_text is not None:
            try:
                formula = parse(formula_text)
            except LtlfSyntaxError as e:
                _fail(400, "formula-syntax", str(e), phase=resource.phase)
            unknown = atoms(formula) - set(atom_map)
            if unknown:
                _fail(400, "unknown-atom",
                      f"formula atoms outside the landmark vocabulary: {sorted(unknown)}",
                      phase=resource.phase)
            return {
                "sentence": None,
                "formula": pretty(formula),
                "expressions": [],
                "symbolic": None,
                "pattern": None,
                "bindings": {},
            }
        pipeline = PipelineConfig(
            profile=config.profile,
            backend=config.backend,
            landmarks=landmarks,
            floor=config.floor,
        )
        try:
            result = translate_sentence(sentence, pipeline)
        except UnresolvedSymbolError as e:
            _fail(400, "unresolved-symbol", str(e),
                  expression=e.expression,
                  candidates=[{"identifier": i, "score": s} for i, s in e.candidates],
                  phase=resource.phase)
        except (TranslationError, ClientError) as e:
            _fail(400, "translation-failed", str(e), phase=resource.phase)
        return {
            "sentence": sentence,
            "formula": pretty(result.formula),
            "expressions": [[e.text, e.offset] for e in result.expressions],
            "symbolic": pretty(result.symbolic.formula),
            "pattern": result.symbolic.pattern,
            "bindings": dict(result.grounding.bindings),
        }

    def _apply_activity(resource: SessionResource, artifacts: dict) -> None:
        resource.sentence = artifacts["sentence"]
        resource.formula = parse(artifacts["formula"])
        resource.artifacts = artifacts
        _advance(resource, "translated")
        resource.emit("activity", sentence=artifacts["sentence"],
                      formula=artifacts["formula"])

    def _apply_confirm(resource: SessionResource) -> None:
        goal_atoms = sorted(atoms(resource.formula))
        missing = [a for a in goal_atoms if a not in atom_map]
        if missing:
            _fail(400, "unknown-atom", f"unmapped atoms {missing}", phase=resource.phase)
        mapping = {a: atom_map[a] for a in goal_atoms}
        try:
            domain = parse_domain(resource.domain.domain_text)
            problem = parse_problem(resource.domain.problem_text, domain)
            task = ground(domain, problem)
            compiled = compile_task(task, resource.formula, mapping)
        except (PddlSyntaxError, GroundingError, CompileError) as e:
            _fail(400, "compile-failed", str(e), phase=resource.phase)
        _advance(resource, "compiled")
        resource.emit("compiled", dfa_states=compiled.dfa.n_states)
        try:
            policy = solve(compiled.task)
        except PlannerError as e:
            _fail(400, "unsolvable", str(e), phase=resource.phase)
        try:
            exec_session = start_session(
                compiled,
                policy,
                chooser=None,
                domain_text=resource.domain.domain_text,
                problem_text=resource.domain.problem_text,
            )
        except ExecutorError as e:
            _fail(400, "policy-rejected", str(e), phase=resource.phase)
        resource.compiled = compiled
        resource.exec_session = exec_session
        _advance(resource, "planned")
        resource.emit("plan-ready", actions=len(policy.actions), tag=policy.tag)
        if exec_session.done:
            _advance(resource, "done")
            resource.emit("done", t=exec_session.t)

    def _commit_step(resource: SessionResource, result) -> None:
        if resource.phase != "done":
            _advance(resource, "executing")
        resource.emit(
            "step",
            t=result.t,
            action=result.action,
            outcome_index=result.outcome_index,
            goal=result.goal,
        )
        if resource.exec_session.done:
            _advance(resource, "done")
            resource.emit("done", t=resource.exec_session.t)

    def _apply_query(resource: SessionResource, record: dict) -> None:
        resource.emit(
            "query",
            question=record["question"],
            scenario=record["scenario"],
            answer=record["answer"],
            soundness=record["evaluation"]["soundness"],
            completeness=record["evaluation"]["completeness"],
        )

    def _restore(session_id: str) -> None:
        records = store.read(session_id)
        if not records:
            return
        resource = SessionResource(
            id=session_id, domain=_domain_or_404(records[0]["domain_id"])
        )
        resource.emit("created", domain_id=records[0]["domain_id"])
        sessions[session_id] = resource
        for record in records[1:]:
            kind = record["kind"]
            if kind == "activity":
                _apply_activity(resource, record["artifacts"])
            elif kind == "confirmed":
                _apply_confirm(resource)
            elif kind == "step":
                result = exec_step(resource.exec_session, choice=record["outcome_index"])
                if isinstance(result, OutcomeMenu) or result.action != record["action"]:
                    raise RuntimeError(
                        f"session {session_id}: replay diverged at t={resource.exec_session.t}"
                    )
                _commit_step(resource, result)
            elif kind == "query":
                _apply_query(resource, record)
            else:
                raise RuntimeError(f"unknown stored record kind {kind!r}")

    for stored in store.domains():
        _register_domain(stored["domain"], stored["problem"], persist=False)
    for session_id in store.session_ids():
        _restore(session_id)

    def _phase_payload(resource: SessionResource, **extra) -> dict:
        return {"session_id": resource.id, "phase": resource.phase, **extra}

    def _step_payload(resource: SessionResource, result) -> dict:
        return _phase_payload(
            resource,
            t=result.t,
            action=result.action,
            outcome_index=result.outcome_index,
            goal=result.goal,
            state=sorted(result.state),
            sync_actions=list(result.sync_actions),
        )

    def _question_for(resource: SessionResource, body: QueryBody) -> Question:
        if body.question is None and body.scenario is None:
            _fail(400, "bad-query", "provide a question or a scenario tag",
                  phase=resource.phase)
        if body.question is None:
            if body.scenario not in SCENARIOS:
                _fail(400, "bad-query", f"unknown scenario {body.scenario!r}",
                      phase=resource.phase)
            digest = hashlib.sha256(
                f"{config.seed}\x1f{resource.id}\x1f{resource.seq}".encode()
            ).digest()
            rng = random.Random(int.from_bytes(digest[:8], "big"))
            return sample_question(body.scenario, rng)
        scenario = body.scenario
        if scenario is None:
            scenario = next(
                (s for s, pool in QUESTION_POOLS.items() if body.question in pool),
                "present",
            )
        if scenario not in SCENARIOS:
            _fail(400, "bad-query", f"unknown scenario {scenario!r}",
                  phase=resource.phase)
        return Question(scenario=scenario, text=body.question)

    @app.post("/domains")
    def post_domain(body: DomainBody):
        dom = _register_domain(body.domain, body.problem, persist=True)
        return {"domain_id": dom.id}

    @app.post("/sessions")
    def post_session(body: SessionBody):
        dom = _domain_or_404(body.domain_id)
        session_id = uuid.uuid4().hex[:12]
        resource = SessionResource(id=session_id, domain=dom)
        resource.emit("created", domain_id=dom.id)
        with registry_lock:
            sessions[session_id] = resource
        store.append(session_id, {"kind": "created", "domain_id": dom.id})
        return _phase_payload(resource)

    @app.post("/sessions/{session_id}/activity")
    def post_activity(session_id: str, body: ActivityBody):
        resource = _session_or_404(session_id)
        with resource.lock:
            _require_phase(resource, ("defined", "translated"))
            artifacts = _translate(resource, body.sentence, body.formula)
            _apply_activity(resource, artifacts)
            store.append(session_id, {"kind": "activity", "artifacts": artifacts})
            return _phase_payload(
                resource,
                formula=artifacts["formula"],
                symbolic_formula=artifacts["symbolic"],
                pattern=artifacts["pattern"],
                expressions=[
                    {"text": t, "offset": o} for t, o in artifacts["expressions"]
                ],
                bindings=artifacts["bindings"],
            )

    @app.post("/sessions/{session_id}/confirm")
    def post_confirm(session_id: str):
        resource = _session_or_404(session_id)
        with resource.lock:
            _require_phase(resource, ("translated",))
            _apply_confirm(resource)
            store.append(session_id, {"kind": "confirmed"})
            session = resource.exec_session
            task = session.compiled.task
            graph = session.graph
            nodes = [
                {
                    "id": state_key(task, node),
                    "goal": node in graph.goals,
                    "initial": node == graph.initial,
                }
                for node in graph.nodes
            ]
            edges = [
                {
                    "source": state_key(task, src),
                    "action": action,
                    "outcome": k,
                    "target": state_key(task, dst),
                }
                for (src, action, k), dst in graph.edges.items()
            ]
            nodes.sort(key=lambda n: n["id"])
            edges.sort(key=lambda e: (e["source"], e["action"], e["outcome"]))
            return _phase_payload(
                resource,
                policy={"actions": len(session.policy.actions), "tag": session.policy.tag},
                plan_graph={"nodes": nodes, "edges": edges},
            )

    @app.post("/sessions/{session_id}/step")
    def post_step(session_id: str, body: StepBody):
        resource = _session_or_404(session_id)
        with resource.lock:
            _require_phase(resource, ("planned", "executing"))
            session = resource.exec_session
            try:
                result = exec_step(session, choice=body.choice)
                if isinstance(result, OutcomeMenu) and body.auto:
                    digest = hashlib.sha256(
                        f"{config.seed}\x1f{resource.id}\x1f{session.t}".encode()
                    ).digest()
                    rng = random.Random(int.from_bytes(digest[:8], "big"))
                    result = exec_step(session, choice=rng.randrange(len(result.options)))
            except ExecutorError as e:
                _fail(400, "bad-step", str(e), phase=resource.phase)
            if isinstance(result, OutcomeMenu):
                return _phase_payload(
                    resource,
                    menu={
                        "action": result.action,
                        "options": [sorted(opt) for opt in result.options],
                    },
                )
            _commit_step(resource, result)
            store.append(session_id, {
                "kind": "step",
                "action": result.action,
                "outcome_index": result.outcome_index,
            })
            return _step_payload(resource, result)

    @app.post("/sessions/{session_id}/query")
    def post_query(session_id: str, body: QueryBody):
        resource = _session_or_404(session_id)
        with resource.lock:
            _require_phase(resource, ("planned", "executing", "done"))
            question = _question_for(resource, body)
            session = resource.exec_session
            domain = parse_domain(resource.domain.domain_text)
            problem = parse_problem(resource.domain.problem_text, domain)
            forms, objects = admissible_vocabulary(domain, problem)
            try:
                answer = ask(session, question, config.backend)
                extraction = extract_fluents(answer, forms, objects, config.backend)
            except ClientError as e:
                _fail(502, "backend-failed", str(e), phase=resource.phase)
            evaluation = score(
                frozenset(extraction.extracted),
                tuple(session.trace),
                session.t,
                question.scenario,
            )
            record = {
                "kind": "query",
                "question": question.text,
                "scenario": question.scenario,
                "answer": answer,
                "evaluation": {
                    "soundness": evaluation.soundness,
                    "completeness": evaluation.completeness,
                    "flagged": evaluation.flagged,
                    "notes": list(evaluation.notes),
                    "predicted": sorted(evaluation.predicted),
                },
            }
            _apply_query(resource, record)
            store.append(session_id, record)
            return _phase_payload(
                resource,
                question=question.text,
                scenario=question.scenario,
                answer=answer,
                evaluation=record["evaluation"],
            )

    @app.get("/sessions/{session_id}/trace")
    def get_trace(session_id: str):
        resource = _session_or_404(session_id)
        session = resource.exec_session
        if session is None:
            return _phase_payload(resource, t=None, trace=[], transitions=[])
        return _phase_payload(
            resource,
            t=session.t,
            trace=[sorted(state) for state in session.trace],
            transitions=[
                {
                    "t": tr.t,
                    "action": tr.action,
                    "outcome_index": tr.outcome_index,
                    "goal": tr.goal,
                    "state": sorted(tr.state),
                }
                for tr in session.transitions
            ],
        )

    @app.get("/sessions/{session_id}/events")
    def get_events(session_id: str, since: int = 0):
        resource = _session_or_404(session_id)
        return _phase_payload(
            resource, events=[e for e in resource.events if e["seq"] > since]
        )

    @app.get("/sessions")
    def list_sessions():
        return {
            "sessions": [
                {"session_id": r.id, "phase": r.phase, "domain_id": r.domain.id}
                for r in sorted(sessions.values(), key=lambda r: r.id)
            ]
        }

    @app.post("/experiments")
    def post_experiments(body: ExperimentBody):
        if body.domain_id is not None:
            dom = _domain_or_404(body.domain_id)
            domain_text, problem_text = dom.domain_text, dom.problem_text
        else:
            domain_text = fixture_text("vineyard-domain.pddl")
            problem_text = fixture_text("vineyard-problem.pddl")
        try:
            goal = parse(body.goal)
        except LtlfSyntaxError as e:
            _fail(400, "formula-syntax", str(e))
        backend = config.backend
        if body.loss_rate:
            backend = replace(backend, kind="mock-lossy", loss_rate=body.loss_rate)
        if body.hallucination_rate:
            backend = replace(
                backend,
                kind="mock-hallucinating",
                hallucination_rate=body.hallucination_rate,
            )
        missing = sorted(a for a in atoms(goal) if a not in atom_map)
        if missing:
            _fail(400, "unknown-atom", f"unmapped atoms {missing}")
        mapping = {a: atom_map[a] for a in atoms(goal)}
        try:
            experiment = ExperimentConfig(
                domain_text=domain_text,
                problem_text=problem_text,
                goal=body.goal,
                atom_map=mapping,
                scenarios=tuple(body.scenarios),
                runs=body.runs,
                seed=body.seed,
                backend=backend,
                p_schedule=PSchedule(),
            )
            report = run_experiments(experiment)
        except (ValueError, PlannerError, CompileError) as e:
            _fail(400, "experiment-failed", str(e))
        return {
            "stats": [
                {
                    "scenario": s.scenario,
                    "category": s.category,
                    "runs": s.runs,
                    "failures": s.failures,
                    "mean_soundness": s.mean_soundness,
                    "std_soundness": s.std_soundness,
                    "mean_completeness": s.mean_completeness,
                    "std_completeness": s.std_completeness,
                }
                for s in report.stats
            ],
            "table": format_report(report),
            "histogram_csv": (
                histogram_csv(report.histogram) if report.histogram is not None else None
            ),
        }

    return app
