"""Command-line entry point.

Subcommands: gen-graph, find-refs, evaluate, pmf, oracle. All structured
output is JSON; the per-iteration Stage-1 trace is CSV. Every subcommand
is deterministic given its full flag set; the seed defaults to the
``RSR_SEED`` environment variable when set.

Exit codes: 0 success, 2 usage error, 3 input validation error,
4 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from . import __version__, files
from .model import ComponentDistribution, SystemModel
from .oracle import crude_monte_carlo, exact_probabilities
from .sysfn import random_geometric_graph
from .workflow import (
    RunConfig,
    Stage1Result,
    multistate_pmf,
    stage1_find_references,
    stage2_evaluate,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_RUNTIME = 4

TRACE_COLUMNS = (
    "ref_count",
    "elapsed_s",
    "phi_evals",
    "p_lower",
    "p_upper",
    "p_unclassified",
    "rss_bytes",
)


def _default_seed() -> int:
    return int(os.environ.get("RSR_SEED", "0"))


def _add_seed(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--seed",
        type=int,
        default=_default_seed(),
        help="random seed (default: $RSR_SEED or 0)",
    )


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--samples", "-H", dest="samples", type=int, default=1_000_000)
    parser.add_argument("--eps-u", type=float, default=1e-5)
    parser.add_argument("--r-max", type=int, default=10_000)
    parser.add_argument("--chunk", type=int, default=65536)
    parser.add_argument("--parallel", type=int, default=1, help="boundary searches per iteration")
    parser.add_argument("--workers", type=int, default=1, help="classification worker threads")
    _add_seed(parser)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rsr",
        description="Reference-state reliability analysis of coherent systems",
    )
    parser.add_argument("--version", action="version", version=f"rsr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-graph", help="generate a random geometric graph file")
    p.add_argument("--n-nodes", type=int, required=True)
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--out", type=Path, required=True)
    _add_seed(p)

    p = sub.add_parser("find-refs", help="Stage 1: discover boundary reference sets")
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--m-prime", type=int, default=0)
    p.add_argument("--out-refs", type=Path, required=True)
    p.add_argument("--out-trace", type=Path)
    _add_run_flags(p)

    p = sub.add_parser("evaluate", help="Stage 2: estimate system probabilities")
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--refs", type=Path, required=True)
    p.add_argument("--out-report", type=Path, required=True)
    p.add_argument("--force", action="store_true", help="ignore model hash mismatch")
    p.add_argument("--samples", "-H", dest="samples", type=int, default=1_000_000)
    p.add_argument("--chunk", type=int, default=65536)
    p.add_argument("--workers", type=int, default=1)
    _add_seed(p)

    p = sub.add_parser("pmf", help="multi-state PMF via both stages per threshold")
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    _add_run_flags(p)

    p = sub.add_parser("oracle", help="ground-truth engines for small models")
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--mode", choices=("exact", "mc"), required=True)
    p.add_argument("--m-prime", type=int, default=0)
    p.add_argument("--samples", "-H", dest="samples", type=int, default=100_000)
    p.add_argument("--out", type=Path)
    _add_seed(p)

    return parser


def _load_model(path: Path) -> tuple[SystemModel, ComponentDistribution, str]:
    if not path.exists():
        raise FileNotFoundError(f"model file not found: {path}")
    return files.load_model(path)


def _write_trace(path: Path, result: Stage1Result) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for rec in result.trace:
            writer.writerow(
                [
                    rec.reference_count,
                    f"{rec.elapsed_seconds:.6f}",
                    rec.phi_evaluations,
                    repr(rec.p_lower),
                    repr(rec.p_upper),
                    repr(rec.p_unclassified),
                    rec.resident_memory_bytes if rec.resident_memory_bytes is not None else "",
                ]
            )


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        n_samples=args.samples,
        eps_u=args.eps_u,
        r_max=args.r_max,
        chunk_size=args.chunk,
        seed=args.seed,
        parallel_searches=args.parallel,
        n_workers=args.workers,
    )


def cmd_gen_graph(args: argparse.Namespace) -> int:
    graph = random_geometric_graph(args.n_nodes, args.radius, args.seed)
    manifest = files.build_manifest(
        "gen-graph", n_nodes=args.n_nodes, radius=args.radius, seed=args.seed
    )
    files.save_graph(args.out, graph, manifest=manifest)
    print(f"wrote {args.out}: {graph.n_nodes} nodes, {graph.n_edges} edges")
    return EXIT_OK


def cmd_find_refs(args: argparse.Namespace) -> int:
    model, dist, digest = _load_model(args.model)
    config = _config_from_args(args)
    result = stage1_find_references(model, dist, config, args.m_prime)
    manifest = files.build_manifest(
        "find-refs",
        config=config,
        model_path=str(args.model),
        model_hash=digest,
        m_prime=args.m_prime,
        terminated_by=result.terminated_by,
        redundant_searches=result.redundant_searches,
    )
    files.save_reference_sets(
        args.out_refs, result.lower, result.upper, digest, manifest=manifest, seed=args.seed
    )
    if args.out_trace:
        _write_trace(args.out_trace, result)
    final = result.trace[-1]
    print(
        f"found {len(result.lower)} lower + {len(result.upper)} upper references "
        f"in {result.iterations} iterations (p_u={final.p_unclassified:.3e}, "
        f"terminated by {result.terminated_by})"
    )
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    model, dist, digest = _load_model(args.model)
    if not args.refs.exists():
        raise FileNotFoundError(f"reference file not found: {args.refs}")
    lower, upper = files.load_reference_sets(args.refs, digest, force=args.force)
    config = RunConfig(
        n_samples=args.samples,
        chunk_size=args.chunk,
        seed=args.seed,
        n_workers=args.workers,
    )
    report = stage2_evaluate(model, dist, lower, upper, config, lower.threshold)
    manifest = files.build_manifest(
        "evaluate",
        config=config,
        model_path=str(args.model),
        model_hash=digest,
        refs_path=str(args.refs),
    )
    files.write_json(
        args.out_report,
        {
            "format": files.FORMAT,
            "p_lower": report.p_lower,
            "p_upper": report.p_upper,
            "cov_lower": report.cov_lower,
            "cov_upper": report.cov_upper,
            "n_samples": report.n_samples,
            "unclassified_resolved": report.unclassified_resolved,
            "threshold": report.threshold,
            "seed": report.seed,
            "manifest": manifest,
        },
    )
    print(
        f"P(S<={report.threshold}) = {report.p_lower:.6e} "
        f"(cov {report.cov_lower if report.cov_lower is not None else 'undefined'}), "
        f"unclassified resolved: {report.unclassified_resolved}"
    )
    return EXIT_OK


def cmd_pmf(args: argparse.Namespace) -> int:
    model, dist, digest = _load_model(args.model)
    config = _config_from_args(args)
    report = multistate_pmf(model, dist, config)
    manifest = files.build_manifest(
        "pmf", config=config, model_path=str(args.model), model_hash=digest
    )
    files.write_json(
        args.out,
        {
            "format": files.FORMAT,
            "pmf": report.pmf.tolist(),
            "cumulative_lower": report.cumulative_lower.tolist(),
            "max_chain_discrepancy": report.max_chain_discrepancy,
            "renormalization_adjustment": report.renormalization_adjustment,
            "thresholds": [
                {
                    "m_prime": r.threshold,
                    "p_lower": r.p_lower,
                    "p_upper": r.p_upper,
                    "cov_lower": r.cov_lower,
                    "cov_upper": r.cov_upper,
                    "unclassified_resolved": r.unclassified_resolved,
                }
                for r in report.stage2_reports
            ],
            "manifest": manifest,
        },
    )
    print("PMF:", " ".join(f"{p:.6e}" for p in report.pmf))
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    model, dist, digest = _load_model(args.model)
    if args.mode == "exact":
        result = exact_probabilities(model, dist)
        payload = {
            "format": files.FORMAT,
            "mode": "exact",
            "cumulative": result.cumulative.tolist(),
            "state_count": result.state_count.tolist(),
            "model_hash": digest,
        }
        print("cumulative:", " ".join(f"{p:.6e}" for p in result.cumulative))
    else:
        p_hat, delta = crude_monte_carlo(model, dist, args.samples, args.seed, args.m_prime)
        payload = {
            "format": files.FORMAT,
            "mode": "mc",
            "m_prime": args.m_prime,
            "p_lower": p_hat,
            "cov": delta,
            "n_samples": args.samples,
            "seed": args.seed,
            "model_hash": digest,
        }
        print(f"P(S<={args.m_prime}) ~= {p_hat:.6e} (cov {delta})")
    if args.out:
        files.write_json(args.out, payload)
    return EXIT_OK


_COMMANDS = {
    "gen-graph": cmd_gen_graph,
    "find-refs": cmd_find_refs,
    "evaluate": cmd_evaluate,
    "pmf": cmd_pmf,
    "oracle": cmd_oracle,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (FileNotFoundError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # pragma: no cover - defensive
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
