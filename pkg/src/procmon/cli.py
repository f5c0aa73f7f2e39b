"""Command-line front door: translate, compile, plan, run, experiment, serve."""

from __future__ import annotations

import json
import socket
import sys
from dataclasses import fields as dataclass_fields
from pathlib import Path

import click

from .compiler import CompileError, compile_task, export_compiled
from .executor import ExecutorError, policy_text, run_to_goal, start_session
from .llmclient import BackendConfig, ClientError
from .ltlf import Formula, LtlfSyntaxError, atoms, parse, pretty
from .monitor import (
    QUESTION_POOLS,
    ExperimentConfig,
    PSchedule,
    Question,
    admissible_vocabulary,
    ask,
    extract_fluents,
    format_report,
    histogram_csv,
    run_experiments,
    score,
)
from .nlfront import (
    PROFILE_NAMES,
    Landmark,
    PipelineConfig,
    TranslationError,
    fixture_text,
    load_landmarks,
    oracle_rer_table,
    parse_landmarks,
    translate_sentence,
)
from .pddl import (
    GroundingError,
    PddlSyntaxError,
    ground,
    parse_domain,
    parse_problem,
    write_domain,
    write_problem,
)
from .planner import PlannerError, SeededChooser, save_policy, solve, state_key

# Exit contract: 0 success, 1 usage, 2 pipeline error.
click.UsageError.exit_code = 1

_BACKEND_ALIASES = {"mock": "mock-oracle", "http": "http-chat"}
_BACKEND_FIELDS = {f.name for f in dataclass_fields(BackendConfig)}


def _die(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(2)


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise click.UsageError(f"config file {path} is not valid JSON: {e}")
    if not isinstance(data, dict):
        raise click.UsageError(f"config file {path} must hold a JSON object")
    return data


def _backend(name: str | None, config: dict) -> BackendConfig:
    section = dict(config.get("backend", {}))
    unknown = set(section) - _BACKEND_FIELDS
    if unknown:
        raise click.UsageError(f"unknown backend config keys: {sorted(unknown)}")
    kind = _BACKEND_ALIASES.get(name, name) if name else section.get("kind", "mock-oracle")
    section["kind"] = _BACKEND_ALIASES.get(kind, kind)
    if section["kind"].startswith("mock-") and not section.get("rer_table"):
        section["rer_table"] = oracle_rer_table()
    try:
        return BackendConfig(**section)
    except ValueError as e:
        raise click.UsageError(str(e))


def _landmarks(path: str | None) -> tuple[Landmark, ...]:
    if path is None:
        return load_landmarks()
    try:
        return parse_landmarks(Path(path).read_text())
    except ValueError as e:
        _die(f"landmark file {path}: {e}")


def _atom_map(formula: Formula, landmarks: tuple[Landmark, ...]) -> dict[str, str]:
    table = {lm.identifier: lm.binds for lm in landmarks if lm.binds}
    missing = sorted(a for a in atoms(formula) if a not in table)
    if missing:
        _die(f"formula atoms have no landmark binding: {missing}")
    return {a: table[a] for a in atoms(formula)}


def _parse_formula(text: str) -> Formula:
    try:
        return parse(text)
    except LtlfSyntaxError as e:
        _die(f"bad formula: {e}")


def _ground_task(domain_path: str, problem_path: str):
    domain_text = Path(domain_path).read_text()
    problem_text = Path(problem_path).read_text()
    try:
        domain = parse_domain(domain_text)
        problem = parse_problem(problem_text, domain)
        return domain_text, problem_text, domain, problem, ground(domain, problem)
    except (PddlSyntaxError, GroundingError) as e:
        _die(str(e))


def _translate_or_die(sentence: str, pipeline: PipelineConfig):
    try:
        return translate_sentence(sentence, pipeline)
    except (TranslationError, ClientError) as e:
        _die(str(e))


def _echo_translation(result) -> None:
    for expr in result.expressions:
        click.echo(f"expression: {expr.text} @ {expr.offset}")
    label = result.symbolic.pattern or "backend"
    click.echo(f"symbolic: {pretty(result.symbolic.formula)} [{label}]")
    for letter, identifier in sorted(result.grounding.bindings.items()):
        click.echo(f"binding: {letter} -> {identifier}")


@click.group()
def main():
    """Define activities in natural language, plan them, monitor execution."""


@main.command()
@click.option("--sentence", required=True, help="Instruction to translate.")
@click.option("--landmarks", "landmarks_path", type=click.Path(exists=True, dir_okay=False),
              help="Landmark file (default: packaged vineyard landmarks).")
@click.option("--backend", "backend_name", default=None,
              help="Backend kind or alias (mock, http, mock-scripted, ...).")
@click.option("--profile", default="augmented-34-18sym", type=click.Choice(PROFILE_NAMES),
              help="Referring-expression prompt profile.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="JSON config file; its backend section seeds the client.")
def translate(sentence, landmarks_path, backend_name, profile, config_path):
    """Translate one instruction into a grounded formula."""
    landmarks = _landmarks(landmarks_path)
    backend = _backend(backend_name, _load_config(config_path))
    pipeline = PipelineConfig(profile=profile, backend=backend, landmarks=landmarks)
    result = _translate_or_die(sentence, pipeline)
    _echo_translation(result)
    click.echo(f"formula: {pretty(result.formula)}")


@main.command("compile")
@click.option("--domain", "domain_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--problem", "problem_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--goal", required=True, help="Activity formula over landmark identifiers.")
@click.option("--landmarks", "landmarks_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out-domain", default="compiled-domain.pddl", show_default=True,
              type=click.Path(dir_okay=False, writable=True))
@click.option("--out-problem", default="compiled-problem.pddl", show_default=True,
              type=click.Path(dir_okay=False, writable=True))
def compile_cmd(domain_path, problem_path, goal, landmarks_path, out_domain, out_problem):
    """Compile an activity into an augmented planning task and write it as PDDL."""
    formula = _parse_formula(goal)
    mapping = _atom_map(formula, _landmarks(landmarks_path))
    *_, task = _ground_task(domain_path, problem_path)
    try:
        compiled = compile_task(task, formula, mapping)
    except CompileError as e:
        _die(str(e))
    exported_domain, exported_problem = export_compiled(compiled)
    Path(out_domain).write_text(write_domain(exported_domain))
    Path(out_problem).write_text(write_problem(exported_problem))
    click.echo(f"automaton states: {compiled.dfa.n_states}")
    click.echo(f"fluents: {len(compiled.task.fluents)}")
    click.echo(f"actions: {len(compiled.task.actions)}")
    click.echo(f"wrote {out_domain} and {out_problem}")


@main.command()
@click.option("--domain", "domain_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--problem", "problem_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--goal", default=None,
              help="Optional activity formula; without it the problem goal is planned as-is.")
@click.option("--landmarks", "landmarks_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", type=click.Path(dir_okay=False, writable=True),
              help="Write the policy file (state-hash TAB action).")
@click.option("--graph", "graph_path", type=click.Path(dir_okay=False, writable=True),
              help="Write the plan graph as JSON.")
def plan(domain_path, problem_path, goal, landmarks_path, out_path, graph_path):
    """Plan a strong-cyclic policy and print it state-abstracted."""
    *_, task = _ground_task(domain_path, problem_path)
    if goal is not None:
        formula = _parse_formula(goal)
        mapping = _atom_map(formula, _landmarks(landmarks_path))
        try:
            task = compile_task(task, formula, mapping).task
        except CompileError as e:
            _die(str(e))
    try:
        policy = solve(task)
    except PlannerError as e:
        _die(f"unsolvable: {e}")
    text = save_policy(task, policy)
    click.echo(text, nl=False)
    if out_path:
        Path(out_path).write_text(text)
    if graph_path:
        from .planner import verify_policy

        graph = verify_policy(task, policy)
        nodes = [
            {
                "id": state_key(task, node),
                "goal": node in graph.goals,
                "initial": node == graph.initial,
            }
            for node in graph.nodes
        ]
        nodes.sort(key=lambda n: n["id"])
        edges = [
            {
                "source": state_key(task, src),
                "action": action,
                "outcome": k,
                "target": state_key(task, dst),
            }
            for (src, action, k), dst in graph.edges.items()
        ]
        edges.sort(key=lambda e: (e["source"], e["action"], e["outcome"]))
        Path(graph_path).write_text(
            json.dumps({"nodes": nodes, "edges": edges}, indent=2) + "\n"
        )


@main.command()
@click.option("--domain", "domain_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--problem", "problem_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--sentence", default=None, help="Instruction to translate and execute.")
@click.option("--goal", default=None, help="Explicit activity formula instead of a sentence.")
@click.option("--landmarks", "landmarks_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--backend", "backend_name", default=None)
@click.option("--profile", default="augmented-34-18sym", type=click.Choice(PROFILE_NAMES))
@click.option("--seed", default=0, show_default=True, help="Outcome chooser seed.")
@click.option("--question", default="What are you doing now?", show_default=True,
              help="Final monitoring question.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
def run(domain_path, problem_path, sentence, goal, landmarks_path, backend_name,
        profile, seed, question, config_path):
    """Run the whole pipeline: translate, compile, plan, execute, query."""
    if (sentence is None) == (goal is None):
        raise click.UsageError("provide exactly one of --sentence or --goal")
    landmarks = _landmarks(landmarks_path)
    backend = _backend(backend_name, _load_config(config_path))
    if sentence is not None:
        pipeline = PipelineConfig(
            profile=profile, backend=backend, landmarks=landmarks
        )
        result = _translate_or_die(sentence, pipeline)
        click.echo(f"sentence: {sentence}")
        _echo_translation(result)
        formula = result.formula
    else:
        formula = _parse_formula(goal)
    click.echo(f"formula: {pretty(formula)}")

    mapping = _atom_map(formula, landmarks)
    domain_text, problem_text, *_ , task = _ground_task(domain_path, problem_path)
    try:
        compiled = compile_task(task, formula, mapping)
        policy = solve(compiled.task)
    except (CompileError, PlannerError) as e:
        _die(str(e))
    try:
        session = start_session(
            compiled,
            policy,
            chooser=SeededChooser(seed),
            domain_text=domain_text,
            problem_text=problem_text,
        )
        click.echo(f"policy: {policy.tag}")
        click.echo(policy_text(session))
        records = run_to_goal(session)
    except ExecutorError as e:
        _die(str(e))
    click.echo("execution:")
    for record in records:
        click.echo(f"  t={record.t} {record.action} outcome={record.outcome_index}"
                   + (" goal" if record.goal else ""))
    click.echo("trace:")
    for instant, state in enumerate(session.trace, start=1):
        click.echo(f"  t={instant}: " + ", ".join(sorted(state)))

    scenario = next(
        (s for s, pool in QUESTION_POOLS.items() if question in pool), "present"
    )
    domain = parse_domain(domain_text)
    problem = parse_problem(problem_text, domain)
    forms, objects = admissible_vocabulary(domain, problem)
    try:
        answer = ask(session, Question(scenario=scenario, text=question), backend)
        extraction = extract_fluents(answer, forms, objects, backend)
    except ClientError as e:
        _die(str(e))
    evaluation = score(
        frozenset(extraction.extracted), tuple(session.trace), session.t, scenario
    )
    click.echo(f"question: {question}")
    click.echo(f"answer: {answer}")
    click.echo(f"soundness: {evaluation.soundness:.2f}")
    click.echo(f"completeness: {evaluation.completeness:.2f}")


@main.command()
@click.option("--goal", required=True, help="Activity formula over landmark identifiers.")
@click.option("--domain", "domain_path", type=click.Path(exists=True, dir_okay=False),
              help="Defaults to the packaged vineyard domain.")
@click.option("--problem", "problem_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--landmarks", "landmarks_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--scenarios", default="present,past,future", show_default=True)
@click.option("--runs", default=5, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--backend", "backend_name", default=None)
@click.option("--loss-rate", default=0.0, show_default=True,
              help="Nonzero switches the mock backend to lossy answers.")
@click.option("--hallucination-rate", default=0.0, show_default=True,
              help="Nonzero switches the mock backend to hallucinated answers.")
@click.option("--histogram", "histogram_path", type=click.Path(dir_okay=False, writable=True),
              help="Write the answer-offset histogram as CSV.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
def experiment(goal, domain_path, problem_path, landmarks_path, scenarios, runs, seed,
               backend_name, loss_rate, hallucination_rate, histogram_path, config_path):
    """Run the monitoring experiment protocol and print the report table."""
    if (domain_path is None) != (problem_path is None):
        raise click.UsageError("--domain and --problem go together")
    if domain_path is not None:
        domain_text = Path(domain_path).read_text()
        problem_text = Path(problem_path).read_text()
    else:
        domain_text = fixture_text("vineyard-domain.pddl")
        problem_text = fixture_text("vineyard-problem.pddl")
    formula = _parse_formula(goal)
    mapping = _atom_map(formula, _landmarks(landmarks_path))
    backend = _backend(backend_name, _load_config(config_path))
    if loss_rate:
        backend = BackendConfig(kind="mock-lossy", loss_rate=loss_rate,
                                rer_table=backend.rer_table)
    if hallucination_rate:
        backend = BackendConfig(kind="mock-hallucinating",
                                hallucination_rate=hallucination_rate,
                                rer_table=backend.rer_table)
    try:
        report = run_experiments(ExperimentConfig(
            domain_text=domain_text,
            problem_text=problem_text,
            goal=goal,
            atom_map=mapping,
            scenarios=tuple(s.strip() for s in scenarios.split(",") if s.strip()),
            runs=runs,
            seed=seed,
            backend=backend,
            p_schedule=PSchedule(),
        ))
    except (ValueError, CompileError, PlannerError, ExecutorError, ClientError) as e:
        _die(str(e))
    click.echo(format_report(report))
    if histogram_path:
        if report.histogram is None:
            _die("no past-scenario answers, so there is no histogram to write")
        Path(histogram_path).write_text(histogram_csv(report.histogram))
        click.echo(f"wrote {histogram_path}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True,
              help="0 picks an ephemeral port and prints it.")
@click.option("--store", "store_dir", default=".procmon-sessions", show_default=True,
              type=click.Path(file_okay=False))
@click.option("--backend", "backend_name", default=None)
@click.option("--profile", default="augmented-34-18sym", type=click.Choice(PROFILE_NAMES))
@click.option("--seed", default=0, show_default=True)
@click.option("--static", "static_dir", type=click.Path(exists=True, file_okay=False),
              help="Serve a console bundle at /ui.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
def serve(host, port, store_dir, backend_name, profile, seed, static_dir, config_path):
    """Serve the HTTP API (and optionally the web console)."""
    import uvicorn

    from .service import ServiceConfig, create_app

    backend = _backend(backend_name, _load_config(config_path))
    app = create_app(ServiceConfig(
        store_dir=store_dir,
        backend=backend,
        profile=profile,
        seed=seed,
        static_dir=static_dir or "",
    ))
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        sock.bind((host, port))
    except OSError as e:
        _die(f"cannot bind {host}:{port}: {e}")
    bound_port = sock.getsockname()[1]
    click.echo(f"listening on http://{host}:{bound_port}")
    sys.stdout.flush()
    server = uvicorn.Server(uvicorn.Config(app, log_level="warning"))
    server.run(sockets=[sock])


if __name__ == "__main__":
    main()
