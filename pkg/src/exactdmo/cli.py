"""Command-line front end: ``exactdmo {train,verify,toy,gen}``.

Exit codes: 0 success, 1 error, 2 (train only) the constrained metric is
still infeasible on the training set after threshold adjustment.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .baselines import train_baseline
from .dataio import DatasetError, gen_gauss2d, gen_toy1d, load_csv, save_csv, spawn_seeds
from .metrics import TaskSpec
from .model import parse_arch
from .solver import TRACE_COLUMNS, SolverConfig, SolverDivergence, run_exact_penalty

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2
METHODS = {"ero": "ERO", "wce": "WCE", "ss-ep": "SS_EP"}
SUMMARY_FIELDS = ("precision", "recall", "f_beta")

log = logging.getLogger("exactdmo")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad flags; 2 is reserved here, so raise instead."""

    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    p = _Parser(prog="exactdmo", description="Direct metric optimization with exact reformulation.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    tr = sub.add_parser("train", parents=[common],
                        help="train a classifier for FPOR / FROP / OFBS")
    tr.add_argument("--task", required=True, choices=("fpor", "frop", "ofbs"))
    tr.add_argument("--alpha", type=float, help="target precision (fpor) or recall (frop)")
    tr.add_argument("--beta", type=float, help="F-beta weight for ofbs (default 1)")
    tr.add_argument("--data", required=True, help="training CSV with a 'label' column")
    tr.add_argument("--test", help="optional test CSV")
    tr.add_argument("--label-column", default="label")
    tr.add_argument("--method", default="ero", choices=tuple(METHODS))
    tr.add_argument("--model", default="linear", help="linear or mlp:H1[,H2...]")
    tr.add_argument("--config", help="JSON file with solver settings")
    tr.add_argument("--seed", type=int)
    tr.add_argument("--repeats", type=int, default=1)
    tr.add_argument("--standardize", action="store_true",
                    help="standardize features with training-set statistics")
    tr.add_argument("--out", help="report path (JSON); stdout if omitted")
    tr.add_argument("--trace", help="write the outer-loop trace of the first run as CSV")

    ve = sub.add_parser("verify", parents=[common], help="run property suites")
    ve.add_argument("suite", choices=("lemma", "gradients", "oracle", "all"))

    to = sub.add_parser("toy", parents=[common],
                        help="write exact vs smoothed metric curves on the 1D toy")
    to.add_argument("--out", required=True)
    to.add_argument("--temps", default="1,2,10", help="comma-separated temperatures")

    ge = sub.add_parser("gen", parents=[common], help="write a synthetic dataset as CSV")
    ge.add_argument("kind", choices=("toy1d", "gauss2d"))
    ge.add_argument("--n", type=int, default=500)
    ge.add_argument("--sep", type=float, default=8.0)
    ge.add_argument("--pos-frac", type=float, default=0.1)
    ge.add_argument("--seed", type=int, default=0)
    ge.add_argument("--out", required=True)
    return p


# --- train -----------------------------------------------------------------------------

def _task_from_args(args) -> TaskSpec:
    if args.task == "ofbs":
        if args.alpha is not None:
            raise UsageError("--alpha is not used with --task ofbs")
        return TaskSpec.ofbs(1.0 if args.beta is None else args.beta)
    if args.alpha is None:
        raise UsageError(f"--task {args.task} requires --alpha")
    if args.beta is not None:
        raise UsageError("--beta is only used with --task ofbs")
    return TaskSpec(args.task, alpha=args.alpha)


def _run_one(job):
    method, train, task, cfg, arch = job
    if method == "ERO":
        return run_exact_penalty(train, task, cfg, arch=arch)
    return train_baseline(train, method, task, cfg, arch=arch)


def _repeat_seeds(seed: int, repeats: int) -> list[int]:
    if repeats == 1:
        return [seed]
    return [int(c.generate_state(1)[0]) for c in spawn_seeds(seed, repeats)]


def _summary(runs: list[dict], split: str) -> dict:
    out = {}
    for stage in ("before_ta", "after_ta"):
        vals = {k: [r[split][stage][k] for r in runs] for k in SUMMARY_FIELDS}
        out[stage] = {k: {"mean": float(np.mean(v)), "std": float(np.std(v))}
                      for k, v in vals.items()}
        out[stage]["feasible_runs"] = sum(bool(r[split][stage]["feasible"]) for r in runs)
    return out


def write_trace(trace: list[dict], path) -> None:
    cols = [c for c in TRACE_COLUMNS if trace and c in trace[0]]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for row in trace:
            w.writerow([row[c] for c in cols])


def cmd_train(args) -> int:
    task = _task_from_args(args)
    parse_arch(args.model)
    if args.repeats < 1:
        raise UsageError("--repeats must be >= 1")
    cfg = SolverConfig.from_json_file(args.config) if args.config else SolverConfig()
    seed = cfg.seed if args.seed is None else args.seed

    train = load_csv(args.data, args.label_column)
    test = load_csv(args.test, args.label_column) if args.test else None
    if args.standardize:
        mean, std = train.features.mean(axis=0), train.features.std(axis=0)
        train = train.standardized(mean, std)
        test = test.standardized(mean, std) if test is not None else None

    method = METHODS[args.method]
    jobs = [(method, train, task, SolverConfig.from_dict({**cfg.to_dict(), "seed": s}),
             args.model) for s in _repeat_seeds(seed, args.repeats)]
    workers = max(1, min(int(os.environ.get("DMO_THREADS", "1") or 1), len(jobs)))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]

    runs = []
    for res in results:
        d = res.to_dict()
        if test is not None:
            before, after = res.evaluate(test)
            d["test"] = {"before_ta": before.to_dict(), "after_ta": after.to_dict()}
        runs.append(d)
    report = runs[0] if len(runs) == 1 else {
        "method": method, "task": task.to_dict(), "repeats": len(runs),
        "summary": {"train": _summary(runs, "train"),
                    **({"test": _summary(runs, "test")} if test is not None else {})},
        "runs": runs}

    text = json.dumps(report, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    if args.trace:
        write_trace(results[0].trace, args.trace)

    for res in results:
        a = res.train_after
        log.info("seed %d: after TA precision=%.4f recall=%.4f f_beta=%.4f feasible=%s",
                 res.config.seed, a.precision, a.recall, a.f_beta, a.feasible)
    if task.constrained and not all(r.train_after.feasible for r in results):
        return EXIT_INFEASIBLE
    return EXIT_OK


# --- verify / toy / gen ----------------------------------------------------------------

def cmd_verify(args) -> int:
    from .verify import run_suite

    results = run_suite(args.suite)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_ERROR


def _parse_temps(text: str) -> list[float]:
    parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise UsageError("--temps needs at least one temperature")
    try:
        temps = [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"bad --temps value {text!r}") from None
    if any(not T > 0 for T in temps):
        raise UsageError("temperatures must be positive")
    return temps


def cmd_toy(args) -> int:
    from .toy import write_toy_csvs

    for path in write_toy_csvs(args.out, _parse_temps(args.temps)):
        print(path)
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.kind == "toy1d":
        data = gen_toy1d(args.n, args.seed)
    else:
        data = gen_gauss2d(args.n, args.sep, args.pos_frac, args.seed)
    save_csv(data, args.out)
    print(f"{args.out}: n={data.n} positives={data.n_pos}")
    return EXIT_OK


COMMANDS = {"train": cmd_train, "verify": cmd_verify, "toy": cmd_toy, "gen": cmd_gen}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_ERROR
    except (DatasetError, FileNotFoundError, OSError, ValueError, SolverDivergence) as exc:
        print(f"exactdmo: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
