"""Seed sweep of the full pipeline on both counting tasks.

    python3 scripts/recover_grammars.py --seeds 10 --out runs/sweep
"""
import argparse
import collections
from pathlib import Path

from asglearn.config import RunConfig
from asglearn.pipeline import run_all


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--tasks", nargs="+", default=["anbncn", "anbncm"])
    ap.add_argument("--provider", default="ngram")
    ap.add_argument("--samples", type=int, default=100, help="phase-2 samples per run")
    ap.add_argument("--out", default="runs/sweep")
    args = ap.parse_args()
    for task in args.tasks:
        tally = collections.Counter()
        for seed in range(args.seeds):
            cfg = RunConfig(task=task, seed=seed, provider=args.provider,
                            eval_samples=args.samples,
                            out=str(Path(args.out) / f"{task}-{seed}"))
            report = run_all(cfg)
            tally[report.status] += 1
            acc = "n/a" if report.accuracy is None else f"{report.accuracy:.1%}"
            print(f"{task} seed {seed}: {report.status:32s} cost {report.hypothesis_cost} "
                  f"|E+|={report.positives} |E-|={report.negatives} phase2 {acc}")
        print(f"{task}: " + ", ".join(f"{k} {v}" for k, v in sorted(tally.items())))


if __name__ == "__main__":
    main()
