#!/usr/bin/env python3
"""Closed-loop monitoring experiments over the bundled vineyard domain.

For each backend (oracle plus optional lossy/hallucinating variants) the
script plans for the goal, executes to completion while asking questions
at random instants, and prints the per-scenario soundness/completeness
table.  The temporal-offset histogram can be written as CSV.
"""

import argparse
import sys
from pathlib import Path

from procmon.llmclient import BackendConfig
from procmon.ltlf import atoms, parse
from procmon.monitor import (
    SCENARIOS, ExperimentConfig, format_report, histogram_csv, run_experiments,
)
from procmon.nlfront import fixture_text, load_landmarks


def backend_configs(args) -> list[BackendConfig]:
    configs = [BackendConfig(kind="mock-oracle", seed=args.seed)]
    if args.loss_rate > 0:
        configs.append(BackendConfig(
            kind="mock-lossy", loss_rate=args.loss_rate, seed=args.seed,
        ))
    if args.hallucination_rate > 0:
        configs.append(BackendConfig(
            kind="mock-hallucinating",
            hallucination_rate=args.hallucination_rate,
            seed=args.seed,
        ))
    return configs


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--goal", default="F harvested_g1",
                        help="activity formula over landmark identifiers")
    parser.add_argument("--domain", type=Path, default=None)
    parser.add_argument("--problem", type=Path, default=None)
    parser.add_argument("--scenarios", default=",".join(SCENARIOS),
                        help="comma-separated subset of present,past,future")
    parser.add_argument("--runs", type=int, default=30)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--loss-rate", type=float, default=0.0)
    parser.add_argument("--hallucination-rate", type=float, default=0.0)
    parser.add_argument("--histogram", type=Path, default=None,
                        help="write the oracle run's offset histogram here")
    args = parser.parse_args(argv)

    if (args.domain is None) != (args.problem is None):
        parser.error("--domain and --problem must be given together")
    domain_text = (
        fixture_text("vineyard-domain.pddl") if args.domain is None
        else args.domain.read_text()
    )
    problem_text = (
        fixture_text("vineyard-problem.pddl") if args.problem is None
        else args.problem.read_text()
    )

    formula = parse(args.goal)
    binds = {lm.identifier: lm.binds for lm in load_landmarks() if lm.binds}
    missing = [a for a in atoms(formula) if a not in binds]
    if missing:
        parser.error(f"no binding for goal atoms: {', '.join(sorted(missing))}")
    atom_map = {a: binds[a] for a in atoms(formula)}
    scenarios = tuple(s.strip() for s in args.scenarios.split(",") if s.strip())

    for backend in backend_configs(args):
        config = ExperimentConfig(
            domain_text=domain_text,
            problem_text=problem_text,
            goal=args.goal,
            atom_map=atom_map,
            scenarios=scenarios,
            runs=args.runs,
            seed=args.seed,
            backend=backend,
        )
        report = run_experiments(config)
        print(f"backend: {backend.kind}")
        print(format_report(report))
        print()
        if backend.kind == "mock-oracle" and args.histogram is not None:
            if report.histogram is None:
                print("no past/future evaluations; histogram skipped",
                      file=sys.stderr)
            else:
                args.histogram.write_text(histogram_csv(report.histogram))
                print(f"wrote {args.histogram}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
