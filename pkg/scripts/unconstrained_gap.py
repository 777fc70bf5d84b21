"""Phase-2 accuracy with and without the learned mask, across temperatures.

Runs the pipeline once per task to obtain a learned ASG, then decodes the
same number of samples constrained and unconstrained.
"""
import argparse
from pathlib import Path

from asglearn.config import RunConfig
from asglearn.pipeline import RunReport, run_all, run_exploit


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=500)
    ap.add_argument("--temperatures", type=float, nargs="+", default=[0.0, 0.5, 1.0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="runs/gap")
    args = ap.parse_args()
    print(f"{'task':8s} {'tau':>4s} {'masked':>8s} {'free':>8s}")
    for task in ("anbncn", "anbncm"):
        base = Path(args.out) / task
        run_all(RunConfig(task=task, seed=args.seed, out=str(base), eval_samples=0))
        for tau in args.temperatures:
            acc = []
            for free in (False, True):
                cfg = RunConfig(task=task, seed=args.seed, eval_temperature=tau,
                                out=str(base / f"tau{tau:g}"))
                report = RunReport(task, args.seed)
                run_exploit(cfg, None if free else base / "learned.asg", args.samples,
                            unconstrained=free, report=report)
                acc.append(report.accuracy)
            print(f"{task:8s} {tau:4g} {acc[0]:8.1%} {acc[1]:8.1%}")


if __name__ == "__main__":
    main()
