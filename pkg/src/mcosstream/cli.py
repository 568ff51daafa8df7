"""Command-line entry point: run, generate, bench and oracle subcommands."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from .bench import bench, parse_bench_config
from .cnf import parse_queries
from .errors import MCOSError
from .feed import members
from .ingest import PRESETS, FeedConfig, generate_feed, parse_feed_config, read_vr, write_vr
from .oracle import oracle_mcos
from .pipeline import ENGINES, run_pipeline
from .report import render_figures, write_csv


def _format_of(path: Path, given: Optional[str]) -> str:
    if given:
        return given
    return "jsonl" if path.suffix in (".jsonl", ".json") else "csv"


def cmd_run(args: argparse.Namespace) -> int:
    relation = read_vr(args.input, args.format)
    queries = parse_queries(Path(args.queries).read_text())
    result = run_pipeline(relation, queries, engine=args.engine, prune=args.prune)
    with open(args.out, "w") as fh:
        for m in result.matches:
            fh.write(m.to_json() + "\n")
    print(json.dumps(result.metrics.as_row()))
    return 0


def cmd_generate(args: argparse.Namespace) -> int:
    cfg = PRESETS[args.preset] if args.preset else FeedConfig()
    if args.config:
        cfg = parse_feed_config(Path(args.config).read_text(), base=cfg)
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    if args.occlusion is not None:
        cfg = cfg.replace(occlusion=args.occlusion)
    relation = generate_feed(cfg)
    out = Path(args.out)
    with out.open("w") as fh:
        write_vr(relation, fh, _format_of(out, args.format))
    print(f"wrote {relation.n_frames} frames, {len(relation.ids)} ids to {out}", file=sys.stderr)
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    cfg = parse_bench_config(Path(args.config).read_text())
    rows = bench(cfg)
    out = Path(args.out)
    write_csv(rows, out)
    figures = [] if args.no_figures else render_figures(rows, out)
    print(f"wrote {len(rows)} rows to {out}", file=sys.stderr)
    for f in figures:
        print(f"wrote {f}", file=sys.stderr)
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    relation = read_vr(args.input, args.format)
    if not 0 <= args.at < relation.n_frames:
        raise MCOSError(f"frame {args.at} outside 0..{relation.n_frames - 1}")
    lo = max(0, args.at - args.window + 1)
    window = [(f, set(members(relation.frames[f]))) for f in range(lo, args.at + 1)]
    pairs = oracle_mcos(window, args.duration)
    rows = sorted(
        (sorted(str(relation.ids.extern(k)) for k in ids), sorted(frames)) for ids, frames in pairs
    )
    for ids, frames in rows:
        print(json.dumps({"frame": args.at, "mcos": ids, "frames": frames}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mcosstream", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="evaluate queries over a relation")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=("csv", "jsonl"))
    p.add_argument("--queries", required=True, help="file with one query per line")
    p.add_argument("--engine", choices=ENGINES, default="ssg")
    p.add_argument("--prune", action="store_true", help="terminate states no >=-only query can match")
    p.add_argument("--out", required=True, help="JSONL match output")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("generate", help="write a synthetic relation")
    p.add_argument("--config", help="key=value feed configuration")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("csv", "jsonl"))
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--seed", type=int)
    p.add_argument("--occlusion", type=int)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("bench", help="sweep engines and parameters")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="CSV output; figures are written next to it")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("oracle", help="brute-force MCOS of one window (debug)")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=("csv", "jsonl"))
    p.add_argument("--window", type=int, required=True)
    p.add_argument("--duration", type=int, default=0)
    p.add_argument("--at", type=int, required=True)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (MCOSError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
