#!/usr/bin/env python3
"""Regenerate the sentence/formula dataset and score the RER profiles.

Prints the per-profile accuracy table (rows: prompt profiles, columns:
navigation / generic task classes).  The mock oracle reproduces the
protocol with perfect extraction; point --backend at a real chat endpoint
to measure an actual model.
"""

import argparse
import sys
from pathlib import Path

from procmon.llmclient import BackendConfig
from procmon.nlfront import (
    PipelineConfig, build_alphabet, dataset_tsv, evaluate_profiles,
    format_extraction_table, generate_dataset, load_landmarks, parse_landmarks,
)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--landmarks", type=Path, default=None,
                        help="landmark file (default: bundled vineyard set)")
    parser.add_argument("--per-pattern", type=int, default=50,
                        help="navigation sentences per pattern")
    parser.add_argument("--generic-per-pattern", type=int, default=43,
                        help="generic sentences per pattern")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--backend", choices=("mock-oracle", "http-chat"),
                        default="mock-oracle")
    parser.add_argument("--endpoint", default="",
                        help="chat-completions base URL for http-chat")
    parser.add_argument("--model", default="",
                        help="model name for http-chat")
    parser.add_argument("--tsv", type=Path, default=None,
                        help="write the generated dataset here")
    args = parser.parse_args(argv)

    landmarks = (
        load_landmarks() if args.landmarks is None
        else parse_landmarks(args.landmarks.read_text())
    )
    alphabet = build_alphabet(landmarks)
    dataset = generate_dataset(
        alphabet,
        n_per_pattern=args.per_pattern,
        generic_per_pattern=args.generic_per_pattern,
        seed=args.seed,
    )
    print(f"dataset: {len(dataset)} pairs", file=sys.stderr)
    if args.tsv is not None:
        args.tsv.write_text(dataset_tsv(dataset))
        print(f"wrote {args.tsv}", file=sys.stderr)

    backend = BackendConfig(
        kind=args.backend,
        endpoint=args.endpoint,
        model=args.model,
        seed=args.seed,
    )
    reports = evaluate_profiles(dataset, PipelineConfig(backend=backend))
    print(format_extraction_table(reports))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
