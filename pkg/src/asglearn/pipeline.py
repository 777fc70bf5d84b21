"""End-to-end runs: explore, label, learn, exploit, evaluate.

Every artifact is a plain-text file under the run's output directory:
``dataset.tsv``, ``learned.asg``, ``hypothesis.txt``, ``phase2.tsv``,
``report.txt`` and ``report.jsonl``.
"""
from __future__ import annotations

import json
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

from .asg import AnnotatedGrammar, parse_asg
from .asg_mask import ASGMask
from .config import RunConfig
from .earley import CFGMask, recognize
from .equivalence import equivalence_check
from .grammar import Grammar, Vocabulary, parse_grammar
from .learner import (Hypothesis, coverage_gaps, generate_space, learn, to_ilasp)
from .oracle import ExampleSet, LabeledExample, label, make_oracle, split_dedup
from .providers import NGramProvider, RemoteProvider, UniformProvider
from .sampling import SampledSequence, cell_rng, explore, sample_sequence

log = logging.getLogger(__name__)

DATASET_HEADER = "# text\tlabel\tinstance\ttemperature\tsample\tterminated"


def load_grammar(path: str) -> Grammar:
    return parse_grammar(Path(path).read_text(encoding="utf-8"))


def load_asg(path: str) -> AnnotatedGrammar:
    return parse_asg(Path(path).read_text(encoding="utf-8"))


def make_provider(cfg: RunConfig, vocab: Vocabulary):
    if cfg.provider == "uniform":
        return UniformProvider(vocab)
    if cfg.provider == "ngram":
        return NGramProvider(vocab, cfg.exemplars, cfg.ngram_order)
    return RemoteProvider(cfg.provider_url, vocab, cfg.provider_timeout, cfg.provider_retries)


# --------------------------------------------------------------------------
# Dataset files

@dataclass(frozen=True)
class DatasetRow:
    text: str
    label: bool | None  # None for unterminated samples
    instance_id: str
    temperature: float
    sample_index: int
    terminated: bool


def write_dataset(path: Path, rows: Sequence[DatasetRow]) -> None:
    lines = [DATASET_HEADER]
    for r in rows:
        lab = "-" if r.label is None else str(int(r.label))
        lines.append("\t".join([r.text, lab, r.instance_id, format(r.temperature, "g"),
                                str(r.sample_index), str(int(r.terminated))]))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_dataset(path: Path) -> list[DatasetRow]:
    rows = []
    for n, line in enumerate(Path(path).read_text(encoding="utf-8").split("\n"), 1):
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 6:
            raise ValueError(f"{path}:{n}: expected 6 tab-separated fields")
        text, lab, inst, temp, idx, term = parts
        rows.append(DatasetRow(text, None if lab == "-" else lab == "1", inst, float(temp),
                               int(idx), term == "1"))
    return rows


def examples_from(rows: Sequence[DatasetRow]) -> list[LabeledExample]:
    return [LabeledExample(r.text, r.label, (r.instance_id, r.temperature, r.sample_index))
            for r in rows if r.terminated and r.label is not None]


# --------------------------------------------------------------------------
# Report

@dataclass
class RunReport:
    task: str
    seed: int
    attempted: int = 0
    labeled: int = 0
    dropped: int = 0
    duplicates: int = 0
    positives: int = 0
    negatives: int = 0
    cfg_violations: int = 0
    hypothesis: list[str] = field(default_factory=list)
    hypothesis_cost: int | None = None
    warnings: list[str] = field(default_factory=list)
    equivalent: bool | None = None
    counterexamples: list[str] = field(default_factory=list)
    lmax: int = 12
    phase2_samples: int = 0
    phase2_passed: int = 0
    phase2_terminated: int = 0
    unconstrained: bool = False
    wall_clock: dict[str, float] = field(default_factory=dict)

    @property
    def accuracy(self) -> float | None:
        return self.phase2_passed / self.phase2_samples if self.phase2_samples else None

    @property
    def status(self) -> str:
        if self.equivalent:
            return "recovered"
        if any(w.startswith("insufficient negative coverage") for w in self.warnings):
            return "insufficient-negative-coverage"
        if self.equivalent is False:
            return "not-recovered"
        return "unverified"

    def records(self) -> list[dict]:
        base = {"task": self.task, "seed": self.seed}
        d = asdict(self)
        acc = self.accuracy
        return [
            {**base, "record": "dataset", **{k: d[k] for k in (
                "attempted", "labeled", "dropped", "duplicates", "positives", "negatives",
                "cfg_violations")}},
            {**base, "record": "hypothesis", "rules": self.hypothesis,
             "cost": self.hypothesis_cost, "warnings": self.warnings},
            {**base, "record": "equivalence", "equivalent": self.equivalent,
             "lmax": self.lmax, "counterexamples": self.counterexamples,
             "status": self.status},
            {**base, "record": "phase2", "samples": self.phase2_samples,
             "passed": self.phase2_passed, "terminated": self.phase2_terminated,
             "accuracy": acc, "unconstrained": self.unconstrained},
            {**base, "record": "timing", **self.wall_clock},
        ]

    def table(self) -> str:
        acc = self.accuracy
        rows = [
            ("task", self.task), ("seed", self.seed),
            ("|D| attempted", self.attempted), ("labeled", self.labeled),
            ("dropped (unterminated)", self.dropped), ("duplicates removed", self.duplicates),
            ("|E+|", self.positives), ("|E-|", self.negatives),
            ("CFG violations in phase 1", self.cfg_violations),
            ("hypothesis cost", "n/a" if self.hypothesis_cost is None else self.hypothesis_cost),
            (f"equivalent to ground truth (len <= {self.lmax})",
             "n/a" if self.equivalent is None else ("yes" if self.equivalent else "NO")),
            ("status", self.status),
            ("phase 2 mode", "unconstrained" if self.unconstrained else "learned ASG"),
            ("phase 2 samples", self.phase2_samples),
            ("phase 2 accuracy", "n/a" if acc is None else f"{100 * acc:.1f}%"),
        ]
        rows += [(f"time: {k}", f"{v:.2f}s") for k, v in self.wall_clock.items()]
        width = max(len(k) for k, _ in rows)
        out = [f"{k:<{width}}  {v}" for k, v in rows]
        if self.hypothesis:
            out.append("learned constraints:")
            out += [f"  {h}" for h in self.hypothesis]
        if self.counterexamples:
            out.append("counterexamples: " + ", ".join(repr(c) for c in self.counterexamples))
        out += [f"warning: {w}" for w in self.warnings]
        return "\n".join(out) + "\n"

    def write(self, out: Path) -> None:
        (out / "report.txt").write_text(self.table(), encoding="utf-8")
        (out / "report.jsonl").write_text(
            "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records()),
            encoding="utf-8")


# --------------------------------------------------------------------------
# Phases

def _out(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def run_explore(cfg: RunConfig, report: RunReport | None = None) -> Path:
    report = report or RunReport(cfg.task, cfg.seed, lmax=cfg.lmax)
    t0 = time.perf_counter()
    g = load_grammar(cfg.cfg)
    vocab = Vocabulary(cfg.vocabulary)
    vocab.check_alphabet(g)
    provider = make_provider(cfg, vocab)
    oracle = make_oracle(cfg.oracle, cfg.oracle_timeout)
    samples = explore(provider, CFGMask(g, vocab), cfg.problem_instances(), cfg.generator,
                      workers=cfg.workers)
    examples, dropped = label(oracle, samples)
    verdicts = iter(examples)
    rows = []
    for s in samples:
        lab = next(verdicts).label if s.terminated else None
        rows.append(DatasetRow(s.text, lab, s.instance_id, s.temperature, s.sample_index,
                               s.terminated))
    path = _out(cfg) / "dataset.tsv"
    write_dataset(path, rows)
    report.attempted = len(samples)
    report.labeled = len(examples)
    report.dropped = dropped
    report.cfg_violations = sum(1 for s in samples if s.terminated and not recognize(g, s.text))
    report.wall_clock["explore"] = time.perf_counter() - t0
    log.info("explored %d sequences (%d dropped) -> %s", len(samples), dropped, path)
    return path


def run_learn(cfg: RunConfig, dataset: Path, report: RunReport | None = None
              ) -> tuple[Path, Hypothesis, ExampleSet]:
    report = report or RunReport(cfg.task, cfg.seed, lmax=cfg.lmax)
    t0 = time.perf_counter()
    g = load_grammar(cfg.cfg)
    rows = read_dataset(dataset)
    examples = split_dedup(examples_from(rows))
    if not len(examples):
        raise ValueError(f"{dataset}: no labeled examples")
    report.duplicates = examples.duplicates
    report.positives = len(examples.positives)
    report.negatives = len(examples.negatives)
    if not report.attempted:
        report.attempted = len(rows)
        report.labeled = sum(r.terminated and r.label is not None for r in rows)
        report.dropped = report.attempted - report.labeled
    space = generate_space(g, cfg.template_config)
    out = _out(cfg)
    if cfg.ilasp_export:
        (out / "task.ilasp").write_text(to_ilasp(space, examples), encoding="utf-8")
    hyp = learn(space, examples, cap=cfg.forest_cap)
    if not examples.negatives:
        report.warnings.append(
            "insufficient negative coverage: no negative examples, learned the empty hypothesis")
    else:
        gaps = coverage_gaps(hyp, examples, cfg.lmax, cfg.forest_cap)
        if gaps:
            names = ", ".join(f"[{gp.candidate}] {space.candidates[gp.candidate]} "
                              f"(would reject {gp.witness!r})" for gp in gaps)
            report.warnings.append(
                "insufficient negative coverage: the examples do not decide " + names)
    path = out / "learned.asg"
    path.write_text(hyp.asg.to_text(), encoding="utf-8")
    (out / "hypothesis.txt").write_text(
        f"cost {hyp.cost}\n" + "".join(line + "\n" for line in hyp.describe()),
        encoding="utf-8")
    report.hypothesis = hyp.describe()
    report.hypothesis_cost = hyp.cost
    report.wall_clock["learn"] = time.perf_counter() - t0
    for w in report.warnings:
        log.warning(w)
    return path, hyp, examples


class _Unconstrained:
    def __init__(self, vocab: Vocabulary):
        self.entries = set(vocab.entries)

    def __call__(self, prefix: str):
        return self.entries


def run_exploit(cfg: RunConfig, asg_path: Path | None, count: int,
                unconstrained: bool = False, report: RunReport | None = None
                ) -> list[SampledSequence]:
    """Phase 2: decode under the ASG mask; the oracle only scores the output."""
    report = report or RunReport(cfg.task, cfg.seed, lmax=cfg.lmax)
    t0 = time.perf_counter()
    vocab = Vocabulary(cfg.vocabulary)
    provider = make_provider(cfg, vocab)
    if unconstrained:
        mask = _Unconstrained(vocab)
    else:
        asg = load_asg(str(asg_path))
        vocab.check_alphabet(asg.grammar)
        # the length limit keeps every allowed path able to end before max_tokens
        mask = ASGMask(asg, vocab, cfg.mask_budget, length_limit=cfg.max_tokens - 1)
    instances = cfg.problem_instances()
    samples = []
    for n in range(count):
        inst = instances[n % len(instances)]
        rng = cell_rng(cfg.seed, 2, n)
        samples.append(sample_sequence(provider, inst, mask, cfg.eval_temperature,
                                       cfg.max_tokens, rng, sample_index=n))
    oracle = make_oracle(cfg.oracle, cfg.oracle_timeout)
    verdicts = oracle.batch([s.text for s in samples])
    passed = [v and s.terminated for s, v in zip(samples, verdicts)]
    out = _out(cfg)
    lines = [DATASET_HEADER]
    for s, ok in zip(samples, passed):
        lines.append("\t".join([s.text, str(int(ok)), s.instance_id,
                                format(s.temperature, "g"), str(s.sample_index),
                                str(int(s.terminated))]))
    name = "phase2_unconstrained.tsv" if unconstrained else "phase2.tsv"
    (out / name).write_text("\n".join(lines) + "\n", encoding="utf-8")
    report.phase2_samples = len(samples)
    report.phase2_passed = sum(passed)
    report.phase2_terminated = sum(s.terminated for s in samples)
    report.unconstrained = unconstrained
    report.wall_clock["exploit"] = time.perf_counter() - t0
    return samples


def run_eval(cfg: RunConfig, asg_path: Path, report: RunReport | None = None) -> RunReport:
    report = report or RunReport(cfg.task, cfg.seed, lmax=cfg.lmax)
    t0 = time.perf_counter()
    if cfg.ground_truth:
        verdict = equivalence_check(load_asg(str(asg_path)), load_asg(cfg.ground_truth),
                                    cfg.lmax)
        report.equivalent = verdict.equivalent
        report.counterexamples = list(verdict.counterexamples)
    report.wall_clock["equivalence"] = time.perf_counter() - t0
    return report


def run_all(cfg: RunConfig, unconstrained: bool = False) -> RunReport:
    report = RunReport(cfg.task, cfg.seed, lmax=cfg.lmax)
    dataset = run_explore(cfg, report)
    asg_path, _, _ = run_learn(cfg, dataset, report)
    run_eval(cfg, asg_path, report)
    run_exploit(cfg, asg_path, cfg.eval_samples, unconstrained=unconstrained, report=report)
    report.write(_out(cfg))
    return report
