"""Command-line entry point: ``asglearn <subcommand> [flags]``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import RunConfig, load_config
from .equivalence import equivalence_check
from .errors import AsgLearnError
from .pipeline import (RunReport, load_asg, run_all, run_eval, run_exploit, run_explore,
                       run_learn)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value run configuration file")
    p.add_argument("--task", help="bundled task preset (anbncn, anbncm)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--samples", type=int, help="phase-2 sample count")
    p.add_argument("--lmax", type=int, help="length bound for the equivalence check")
    p.add_argument("--provider", choices=("uniform", "ngram", "remote"))
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="asglearn",
        description="Learn answer set grammars from CFG-guided samples, then decode under them.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("explore", help="phase 1: CFG-masked sampling and oracle labeling")
    _common(p)

    p = sub.add_parser("learn", help="learn an ASG from a labeled dataset")
    _common(p)
    p.add_argument("--dataset", help="dataset.tsv (default: <out>/dataset.tsv)")

    for name, text in (("exploit", "phase 2: decode under the learned ASG"),
                       ("eval", "equivalence to ground truth plus phase-2 accuracy")):
        p = sub.add_parser(name, help=text)
        _common(p)
        p.add_argument("--asg", help="learned ASG (default: <out>/learned.asg)")
        p.add_argument("--unconstrained", action="store_true",
                       help="baseline: any token or end at every step")

    p = sub.add_parser("equiv", help="compare the languages of two ASG files")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--lmax", type=int, default=12)

    p = sub.add_parser("run-all", help="explore, learn, evaluate and exploit in one go")
    _common(p)
    p.add_argument("--unconstrained", action="store_true",
                   help="phase 2 without the learned mask")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig(task=args.task or "anbncn")
    if args.config and args.task and args.task != cfg.task:
        cfg = RunConfig(**{**cfg.__dict__, "task": args.task, "cfg": "", "ground_truth": "",
                           "oracle": "", "exemplars": ()})
    return cfg.with_overrides(seed=args.seed, out=args.out, eval_samples=args.samples,
                              lmax=args.lmax, provider=args.provider)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return _dispatch(args)
    except AsgLearnError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "equiv":
        verdict = equivalence_check(load_asg(args.a), load_asg(args.b), args.lmax)
        print(f"checked {verdict.checked} strings up to length {verdict.lmax}")
        if verdict.equivalent:
            print("equivalent")
            return 0
        print("different; counterexamples: " + ", ".join(repr(w) for w in verdict.counterexamples))
        return 1

    cfg = resolve_config(args)
    out = Path(cfg.out)
    report = RunReport(cfg.task, cfg.seed, lmax=cfg.lmax)

    if args.command == "explore":
        path = run_explore(cfg, report)
        print(f"wrote {path}: {report.attempted} sequences, {report.labeled} labeled, "
              f"{report.dropped} dropped")
        return 0

    if args.command == "learn":
        dataset = Path(args.dataset) if args.dataset else out / "dataset.tsv"
        path, hyp, ex = run_learn(cfg, dataset, report)
        print(f"|E+| = {len(ex.positives)}, |E-| = {len(ex.negatives)}, "
              f"duplicates = {ex.duplicates}")
        print(f"learned cost {hyp.cost}: " + ("; ".join(hyp.describe()) or "(empty)"))
        for w in report.warnings:
            print(f"warning: {w}")
        print(f"wrote {path}")
        return 0

    if args.command in ("exploit", "eval"):
        asg = Path(args.asg) if args.asg else out / "learned.asg"
        if args.command == "eval" and not args.unconstrained:
            run_eval(cfg, asg, report)
        run_exploit(cfg, None if args.unconstrained else asg, cfg.eval_samples,
                    unconstrained=args.unconstrained, report=report)
        report.write(out)
        sys.stdout.write(report.table())
        return 0

    report = run_all(cfg, unconstrained=args.unconstrained)
    sys.stdout.write(report.table())
    return 0 if report.equivalent is not False else 1


if __name__ == "__main__":
    sys.exit(main())
