"""Command-line surface: sampling, potentials, phase scans, self-checks.

Every command resolves its parameters into a config record that is
embedded in the output next to the package version, and all sampling
runs on explicit seeds (flag, then the LEP_SEED environment variable,
then 0). Primary outputs never carry wall-clock data, so a rerun with
the same config is byte-identical; timings go to stderr and the
runtime_ms field in JSON records stays null. The --jobs flag only caps
thread concurrency and never changes results, so it is likewise left
out of the embedded config.

Exit codes: 0 on success, 1 on usage errors, 2 when a verify suite
reports failures.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction

from . import __version__
from .exact import u_complete_exact, u_enumeration, u_two_community_exact
from .forests import forest_to_partition, forest_to_text, partition_to_text
from .graphs import CompleteModel, TwoCommunityModel, WeightedGraph, read_graph_file
from .montecarlo import McConfig, estimate_potential
from .phase import DEFAULT_POINTS, DEFAULT_SIZES, MC_SAMPLES, rows_to_csv, rows_to_records, sweep
from .rng import batch_seed
from .verify import SUITES, run_suite
from .walks import wilson_forest


class _Parser(argparse.ArgumentParser):
    """Argument parser that exits with code 1 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("LEP_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise SystemExit(f"lepart: error: LEP_SEED must be an integer, got {env!r}")
    return 0


def _parse_exponent(parser, label, text) -> Fraction:
    """Exact rational from 'p/q' or a decimal literal."""
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        parser.error(f"--{label} must be a rational like 3/10 or 0.3, got {text!r}")


def _build_target(parser, args):
    """Model or graph named by the arguments."""
    if args.graph is not None:
        if args.model is not None:
            parser.error("pass either --graph or --model, not both")
        try:
            return read_graph_file(args.graph)
        except (OSError, ValueError) as exc:
            parser.error(f"cannot read graph file: {exc}")
    if args.model is None:
        parser.error("need --model or --graph")
    if args.N is None:
        parser.error("--model needs --N")
    try:
        if args.model == "complete":
            return CompleteModel(args.N, args.w)
        return TwoCommunityModel(args.N, args.w1, args.w2)
    except ValueError as exc:
        parser.error(str(exc))


def _target_config(target):
    if isinstance(target, CompleteModel):
        return {"model": "complete", "N": target.N, "w": target.w}
    if isinstance(target, TwoCommunityModel):
        return {"model": "two-community", "N": target.N, "w1": target.w1, "w2": target.w2}
    return {"model": "graph", "n_vertices": target.n_vertices}


def _emit(text: str, out_path) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w") as fh:
            fh.write(text)


def _emit_json(payload, out_path) -> None:
    _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", out_path)


def _block_view(target, partition):
    """Blocks sorted largest first, with community purity when known."""
    blocks = sorted(partition.blocks, key=lambda b: (-len(b), b[0]))
    sizes = [len(b) for b in blocks]
    if isinstance(target, TwoCommunityModel):
        purity = []
        for block in blocks:
            home = sum(1 for v in block if target.community(v) == 0)
            purity.append(max(home, len(block) - home) / len(block))
        return sizes, purity
    return sizes, None


def cmd_sample_forest(parser, args) -> int:
    if args.q is None or args.q <= 0.0:
        parser.error("--q must be a positive rate")
    if args.count < 1:
        parser.error("--count must be at least 1")
    target = _build_target(parser, args)
    seed = _resolve_seed(args)
    prefix = args.out if args.out is not None else "sample"
    config = {
        "command": "sample-forest",
        "target": _target_config(target),
        "graph_file": args.graph,
        "q": args.q,
        "count": args.count,
        "seed": seed,
        "out": prefix,
    }
    samples = []
    for i in range(args.count):
        forest = wilson_forest(target, args.q, batch_seed(seed, i))
        partition = forest_to_partition(forest)
        forest_file = f"{prefix}_forest_{i}.txt"
        partition_file = f"{prefix}_partition_{i}.txt"
        with open(forest_file, "w") as fh:
            fh.write(forest_to_text(forest))
        with open(partition_file, "w") as fh:
            fh.write(partition_to_text(partition))
        sizes, purity = _block_view(target, partition)
        record = {
            "index": i,
            "forest_file": forest_file,
            "partition_file": partition_file,
            "n_blocks": forest.n_trees,
            "block_sizes": sizes,
        }
        if purity is not None:
            record["block_purity"] = purity
        samples.append(record)
    summary = {
        "config": config,
        "version": __version__,
        "runtime_ms": None,
        "samples": samples,
    }
    _emit_json(summary, f"{prefix}_summary.json")
    print(f"wrote {args.count} forests to {prefix}_*; summary {prefix}_summary.json",
          file=sys.stderr)
    return 0


def _potential_pair(parser, args, target):
    """Vertex pair from --x/--y, or from --star on a two-community model."""
    x, y = args.x, args.y
    if x is None and y is None:
        if isinstance(target, TwoCommunityModel):
            star = args.star or "out"
            x, y = (0, 1) if star == "in" else (0, target.N)
        else:
            x, y = 0, 1
    if x is None or y is None:
        parser.error("pass both --x and --y, or neither")
    n = target.n_vertices
    if x == y or not (0 <= x < n) or not (0 <= y < n):
        parser.error(f"need two distinct vertices in 0..{n - 1}")
    return x, y


def cmd_potential(parser, args) -> int:
    if args.q is None or args.q <= 0.0:
        parser.error("--q must be a positive rate")
    target = _build_target(parser, args)
    seed = _resolve_seed(args)
    config = {
        "command": "potential",
        "mode": args.mode,
        "target": _target_config(target),
        "graph_file": args.graph,
        "q": args.q,
        "seed": seed,
    }

    if args.mode == "exact":
        if args.x is not None or args.y is not None:
            parser.error("exact mode picks the pair by symmetry; use --star, not --x/--y")
        if isinstance(target, CompleteModel):
            result = u_complete_exact(target.N, target.w, args.q)
        elif isinstance(target, TwoCommunityModel):
            star = args.star
            if star is None:
                parser.error("exact two-community potential needs --star in|out")
            config["star"] = star
            result = u_two_community_exact(target.N, target.w1, target.w2, args.q, star)
        else:
            parser.error("exact mode needs --model complete or two-community")
        record = {
            "config": config,
            "version": __version__,
            "estimate": result.value,
            "stderr": None,
            "n": None,
            "seed": None,
            "method": result.method,
            "runtime_ms": None,
        }
    elif args.mode == "enum":
        graph = target if isinstance(target, WeightedGraph) else target.expand()
        x, y = _potential_pair(parser, args, target)
        config.update({"x": x, "y": y})
        try:
            result = u_enumeration(graph, args.q, x, y)
        except ValueError as exc:
            parser.error(str(exc))
        record = {
            "config": config,
            "version": __version__,
            "estimate": result.value,
            "stderr": None,
            "n": None,
            "seed": None,
            "method": result.method,
            "runtime_ms": None,
        }
    elif args.mode == "mc":
        x, y = _potential_pair(parser, args, target)
        cfg = McConfig.for_run(args.samples, base_seed=seed, max_concurrency=args.jobs)
        config.update({"x": x, "y": y, "samples": cfg.n_samples, "method": args.method})
        est = estimate_potential(target, args.q, x, y, cfg, method=args.method)
        record = {
            "config": config,
            "version": __version__,
            "estimate": est.mean,
            "stderr": est.stderr,
            "n": est.n,
            "seed": seed,
            "method": f"monte-carlo/{args.method}",
            "runtime_ms": None,
        }
    else:
        parser.error("--mode must be exact, mc, or enum")

    _emit_json(record, args.out)
    return 0


def cmd_phase_scan(parser, args) -> int:
    if (args.alpha is None) != (args.beta is None):
        parser.error("pass --alpha and --beta together")
    if args.alpha is not None:
        points = [(
            _parse_exponent(parser, "alpha", args.alpha),
            _parse_exponent(parser, "beta", args.beta),
        )]
    else:
        points = DEFAULT_POINTS
    if args.sizes is not None:
        try:
            sizes = tuple(int(tok) for tok in args.sizes.split(","))
        except ValueError:
            parser.error(f"--sizes must be comma-separated integers, got {args.sizes!r}")
        if not sizes or any(n < 2 for n in sizes):
            parser.error("--sizes entries must be at least 2")
    else:
        sizes = DEFAULT_SIZES
    seed = _resolve_seed(args)
    samples = args.samples if args.samples is not None else MC_SAMPLES
    mc_config = McConfig.for_run(samples, base_seed=seed, max_concurrency=args.jobs)
    config = {
        "command": "phase-scan",
        "points": [[str(a), str(b)] for a, b in points],
        "sizes": list(sizes),
        "samples": samples,
        "seed": seed,
        "format": args.format,
    }
    rows = sweep(points, sizes, mc_config=mc_config)
    if args.format == "csv":
        note = f"config={json.dumps(config, sort_keys=True)} version={__version__}"
        _emit(rows_to_csv(rows, note=note), args.out)
    else:
        payload = {
            "config": config,
            "version": __version__,
            "runtime_ms": None,
            "rows": rows_to_records(rows),
        }
        _emit_json(payload, args.out)
    return 0


def cmd_verify(parser, args) -> int:
    extra = [("user-graph", path) for path in (args.graph,) if path is not None]
    results = run_suite(args.suite, extra_graphs=extra)
    failed = [r for r in results if not r.passed]
    seed_note = "pinned per check"
    report = {
        "config": {
            "command": "verify",
            "suite": args.suite,
            "graph_file": args.graph,
            "seeds": seed_note,
        },
        "version": __version__,
        "runtime_ms": None,
        "n_checks": len(results),
        "n_failed": len(failed),
        "passed": not failed,
        "checks": [r.as_dict() for r in results],
    }
    _emit_json(report, args.out)
    for r in failed:
        print(f"FAIL {r.name}: measured {r.measured}, expected {r.expected}",
              file=sys.stderr)
    return 2 if failed else 0


def _add_target_flags(sub):
    sub.add_argument("--model", choices=("complete", "two-community"),
                     help="built-in graph family")
    sub.add_argument("--graph", help="edge-list graph file instead of --model")
    sub.add_argument("--N", type=int, help="vertices per community (or graph size)")
    sub.add_argument("--w", type=float, default=1.0, help="complete-graph edge weight")
    sub.add_argument("--w1", type=float, help="weight inside a community")
    sub.add_argument("--w2", type=float, help="weight across communities")
    sub.add_argument("--q", type=float, help="killing rate")


def build_parser() -> _Parser:
    parser = _Parser(prog="lepart", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"lepart {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("sample-forest", help="sample rooted forests to files")
    _add_target_flags(sub)
    sub.add_argument("--count", type=int, default=1, help="number of forests")
    sub.add_argument("--seed", type=int, help="base seed (default LEP_SEED or 0)")
    sub.add_argument("--out", help="output prefix (default 'sample')")
    sub.set_defaults(handler=cmd_sample_forest)

    sub = commands.add_parser("potential", help="separation potential of a vertex pair")
    _add_target_flags(sub)
    sub.add_argument("--mode", choices=("exact", "mc", "enum"), default="exact")
    sub.add_argument("--x", type=int, help="first vertex")
    sub.add_argument("--y", type=int, help="second vertex")
    sub.add_argument("--star", choices=("in", "out"),
                     help="two-community pair kind when --x/--y are omitted")
    sub.add_argument("--method", choices=("forest", "split"), default="forest",
                     help="mc estimator variant")
    sub.add_argument("--samples", type=int, default=10**5, help="mc sample count")
    sub.add_argument("--seed", type=int, help="base seed (default LEP_SEED or 0)")
    sub.add_argument("--jobs", type=int, default=1, help="max concurrent batches")
    sub.add_argument("--out", help="output file (default stdout)")
    sub.set_defaults(handler=cmd_potential)

    sub = commands.add_parser("phase-scan", help="potential sweep over the (alpha, beta) grid")
    sub.add_argument("--alpha", help="rational exponent of q = N^alpha")
    sub.add_argument("--beta", help="rational exponent of w2 = N^-beta")
    sub.add_argument("--sizes", help="comma-separated community sizes "
                                     f"(default {','.join(map(str, DEFAULT_SIZES))})")
    sub.add_argument("--samples", type=int,
                     help="sample count for points beyond the exact-size cutoff")
    sub.add_argument("--seed", type=int, help="base seed (default LEP_SEED or 0)")
    sub.add_argument("--jobs", type=int, default=1, help="max concurrent batches")
    sub.add_argument("--format", choices=("csv", "json"), default="csv")
    sub.add_argument("--out", help="output file (default stdout)")
    sub.set_defaults(handler=cmd_phase_scan)

    sub = commands.add_parser("verify", help="run a self-check suite")
    sub.add_argument("--suite", choices=SUITES, required=True)
    sub.add_argument("--graph", help="extra graph file for the oracle battery")
    sub.add_argument("--out", help="output file (default stdout)")
    sub.set_defaults(handler=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.time()
    code = args.handler(parser, args)
    elapsed = int(round((time.time() - started) * 1000.0))
    print(f"# {args.command} finished in {elapsed} ms", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
