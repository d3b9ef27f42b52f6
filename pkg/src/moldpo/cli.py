"""Command-line interface.

Subcommands cover the whole workflow: corpus generation, pretraining,
preference optimization, standalone scoring, the benchmark sweep and report
extraction. Exit codes: 0 success, 1 for configuration problems (bad flags,
malformed or missing configs, undersized corpora), 2 for runtime failures.
MOLDPO_THREADS caps torch CPU parallelism for the whole process.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import traceback
from pathlib import Path
from typing import List, Optional, Sequence

from .datagen import generate_corpus, write_corpus
from .errors import (
    ConfigError,
    CorpusTooSmall,
    EmptyTerms,
    InvalidConfig,
    InvalidTarget,
    MalformedFormula,
    MoldpoError,
    SchemaError,
    TooFewOracles,
    UnknownSelector,
)
from .smiles import canonical_smiles, is_valid

CONFIG_ERRORS = (
    ConfigError,
    SchemaError,
    InvalidConfig,
    InvalidTarget,
    MalformedFormula,
    CorpusTooSmall,
    EmptyTerms,
    UnknownSelector,
    TooFewOracles,
)

SCORE_HEADER = ["canonical", "valid", "score"]
SUMMARY_HEADER = ["task", "top1", "top10_mean", "top100_mean", "steps", "wallclock_s"]
CURVE_HEADER = ["step", "top10_mean"]
BAND_HEADER = ["step", "p10", "p50", "p90"]


def _fnum(x: float) -> str:
    return format(float(x), ".10g")


class _Parser(argparse.ArgumentParser):
    # Usage mistakes are configuration errors, not runtime failures.
    def error(self, message):
        raise ConfigError(message)


def _apply_thread_cap() -> None:
    raw = os.environ.get("MOLDPO_THREADS")
    if raw is None:
        return
    try:
        threads = int(raw)
    except ValueError:
        raise ConfigError(f"MOLDPO_THREADS must be an integer, got {raw!r}")
    if threads < 1:
        raise ConfigError(f"MOLDPO_THREADS must be at least 1, got {threads}")
    import torch

    torch.set_num_threads(threads)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="moldpo", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    pre = sub.add_parser("pretrain", help="train a prior on a SMILES corpus")
    pre.add_argument("--config", required=True, help="pretrain config JSON")
    pre.add_argument("--seed", type=int, default=None, help="override config seed")
    pre.add_argument("--out", required=True, help="output directory")

    opt = sub.add_parser("optimize", help="run preference optimization on a task")
    opt.add_argument("--config", required=True, help="run config JSON")
    opt.add_argument("--seed", type=int, default=None, help="override config seed")
    opt.add_argument("--out", required=True, help="output directory")
    opt.add_argument("--num-agents", type=int, default=None, help="override agent count")
    opt.add_argument(
        "--sampling-ratio", type=float, default=None, help="override sampling ratio"
    )
    opt.add_argument(
        "--resume", action="store_true", help="continue from the last stage snapshot"
    )

    score = sub.add_parser("score", help="score a molecule file against a task")
    score.add_argument("--config", required=True, help="task config JSON or pack name")
    score.add_argument("--smiles", required=True, help="input file, one SMILES per line")
    score.add_argument("--out", required=True, help="output CSV path or directory")

    bench = sub.add_parser("benchmark", help="run every task in a pack")
    bench.add_argument("--config", required=True, help="run config JSON (task field ignored)")
    bench.add_argument("--seed", type=int, default=None, help="override config seed")
    bench.add_argument("--out", required=True, help="output directory")
    bench.add_argument(
        "--tasks", default=None, help="directory of task JSONs (default: shipped pack)"
    )

    rep = sub.add_parser("report", help="extract curve and band CSVs from a run")
    rep.add_argument("--config", required=True, help="run manifest JSON")
    rep.add_argument("--out", required=True, help="output directory")

    gen = sub.add_parser("make-corpus", help="generate a synthetic training corpus")
    gen.add_argument("--out", required=True, help="output corpus file")
    gen.add_argument("--size", type=int, default=10_000, help="unique molecules")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument(
        "--include", action="append", default=[], help="extra SMILES line (repeatable)"
    )
    gen.add_argument(
        "--copies", type=int, default=25, help="repetitions of each include line"
    )
    return parser


def cmd_pretrain(args) -> None:
    from .pretrain import load_pretrain_config, pretrain

    config = load_pretrain_config(args.config, overrides={"seed": args.seed})
    report = pretrain(config, args.out)
    print(f"checkpoint: {Path(args.out) / 'model.mdpo'}")
    print(f"report: {Path(args.out) / 'pretrain_report.json'}")
    print(f"validity: {report.validity:.3f} ({report.n_valid}/{report.sample_n})")


def cmd_optimize(args) -> None:
    from .engine import load_run_config, run_optimization

    config = load_run_config(
        args.config,
        overrides={
            "seed": args.seed,
            "num_agents": args.num_agents,
            "sampling_ratio": args.sampling_ratio,
        },
    )
    manifest = run_optimization(config, args.out, resume=args.resume)
    print(f"run {manifest.run_id}: {manifest.total_steps} steps completed")
    print(f"manifest: {Path(args.out) / 'manifest.json'}")


def cmd_score(args) -> None:
    from .engine import resolve_oracle

    oracle = resolve_oracle(args.config)
    try:
        raw_lines = Path(args.smiles).read_text(encoding="utf-8").splitlines()
    except FileNotFoundError:
        raise ConfigError(f"molecule file not found: {args.smiles}")
    out_path = Path(args.out)
    if out_path.is_dir():
        out_path = out_path / "scores.csv"
    with out_path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SCORE_HEADER)
        for line in raw_lines:
            text = line.strip()
            if is_valid(text):
                writer.writerow(
                    [canonical_smiles(text), "true", _fnum(oracle.score_text(text))]
                )
            else:
                writer.writerow(["", "false", _fnum(0.0)])
    print(f"scored {len(raw_lines)} lines -> {out_path}")


def _memory_scores(run_dir: Path) -> List[float]:
    lines = (run_dir / "memory_final.csv").read_text(encoding="utf-8").splitlines()
    return [float(line.split(",")[1]) for line in lines[1:]]


def cmd_benchmark(args) -> None:
    from .engine import load_run_config, run_optimization, top_mean
    from .tasks import task_pack_names

    base = load_run_config(args.config, overrides={"seed": args.seed})
    if args.tasks is not None:
        tasks_dir = Path(args.tasks)
        if not tasks_dir.is_dir():
            raise ConfigError(f"task directory not found: {tasks_dir}")
        task_list = [(p.stem, str(p)) for p in sorted(tasks_dir.glob("*.json"))]
    else:
        task_list = [(name, name) for name in task_pack_names()]
    if not task_list:
        raise ConfigError("no tasks to benchmark")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    failures = []
    for name, task_ref in task_list:
        doc = base.to_dict()
        doc["task"] = task_ref
        try:
            config = load_run_config(doc)
            manifest = run_optimization(config, out / name)
            scores = _memory_scores(out / name)
            rows.append(
                [
                    name,
                    _fnum(top_mean(scores, 1)),
                    _fnum(top_mean(scores, 10)),
                    _fnum(top_mean(scores, 100)),
                    manifest.total_steps,
                    _fnum(manifest.wallclock_s),
                ]
            )
        except Exception as exc:
            failures.append((name, exc))
            print(f"task {name} failed: {exc}", file=sys.stderr)
    if not rows:
        _, exc = failures[0]
        raise exc
    totals = [
        "total",
        _fnum(sum(float(r[1]) for r in rows)),
        _fnum(sum(float(r[2]) for r in rows)),
        _fnum(sum(float(r[3]) for r in rows)),
        sum(int(r[4]) for r in rows),
        _fnum(sum(float(r[5]) for r in rows)),
    ]
    summary = out / "summary.csv"
    with summary.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_HEADER)
        writer.writerows(rows)
        writer.writerow(totals)
    print(f"summary: {summary} ({len(rows)} tasks, total top-1 {totals[1]})")


def cmd_report(args) -> None:
    from .engine import load_manifest

    manifest = load_manifest(args.config)
    run_dir = Path(args.config).parent
    bands_path = run_dir / manifest.paths["bands"]
    if not bands_path.exists():
        raise ConfigError(f"bands file missing: {bands_path}")
    lines = bands_path.read_text(encoding="utf-8").splitlines()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    curve_path = out / "curve.csv"
    band_path = out / "band.csv"
    with curve_path.open("w", encoding="utf-8", newline="") as curve_fh, band_path.open(
        "w", encoding="utf-8", newline=""
    ) as band_fh:
        curve = csv.writer(curve_fh, lineterminator="\n")
        band = csv.writer(band_fh, lineterminator="\n")
        curve.writerow(CURVE_HEADER)
        band.writerow(BAND_HEADER)
        for line in lines[1:]:
            step, top10_mean, p10, p50, p90, _ = line.split(",")
            curve.writerow([step, top10_mean])
            band.writerow([step, p10, p50, p90])
    print(f"curve: {curve_path}")
    print(f"bands: {band_path}")


def cmd_make_corpus(args) -> None:
    if args.size < 1:
        raise ConfigError(f"--size must be positive, got {args.size}")
    if args.copies < 1:
        raise ConfigError(f"--copies must be positive, got {args.copies}")
    try:
        lines = generate_corpus(
            args.size, seed=args.seed, include=args.include, include_copies=args.copies
        )
    except MoldpoError as exc:
        raise ConfigError(str(exc))
    write_corpus(args.out, lines)
    print(f"wrote {len(lines)} lines -> {args.out}")


COMMANDS = {
    "pretrain": cmd_pretrain,
    "optimize": cmd_optimize,
    "score": cmd_score,
    "benchmark": cmd_benchmark,
    "report": cmd_report,
    "make-corpus": cmd_make_corpus,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _apply_thread_cap()
        COMMANDS[args.command](args)
    except CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (MoldpoError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
