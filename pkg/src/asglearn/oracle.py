"""Ground-truth labeling of sampled strings and assembly of the example set."""
from __future__ import annotations

import re
import shlex
import subprocess
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .errors import InconsistentOracle, OracleFailure
from .sampling import SampledSequence

_BLOCKS = re.compile(r"(a*)(b*)(c*)")


def anbncn(w: str) -> bool:
    m = _BLOCKS.fullmatch(w)
    return bool(m) and len(m[1]) == len(m[2]) == len(m[3]) >= 1


def anbncm(w: str) -> bool:
    m = _BLOCKS.fullmatch(w)
    return bool(m) and len(m[1]) == len(m[2]) >= 1 and len(m[3]) >= 1


class Oracle:
    """Deterministic validator ``V : str -> bool``, applied in batches."""

    def __init__(self, fn: Callable[[str], bool], name: str = ""):
        self.fn = fn
        self.name = name or getattr(fn, "__name__", "oracle")

    def __call__(self, w: str) -> bool:
        return self.batch([w])[0]

    def batch(self, texts: Sequence[str]) -> list[bool]:
        try:
            return [bool(self.fn(t)) for t in texts]
        except Exception as exc:
            raise OracleFailure(f"oracle {self.name} raised: {exc}") from exc


class CommandOracle(Oracle):
    """External program: strings one per line on stdin, ``1``/``0`` per line back."""

    def __init__(self, command: str | Sequence[str], timeout: float = 60.0):
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)
        self.timeout = timeout
        self.name = " ".join(self.argv)

    def batch(self, texts: Sequence[str]) -> list[bool]:
        if not texts:
            return []
        if any("\n" in t for t in texts):
            raise OracleFailure("strings containing newlines cannot be sent to the oracle")
        try:
            proc = subprocess.run(self.argv, input="".join(t + "\n" for t in texts),
                                  capture_output=True, text=True, timeout=self.timeout)
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise OracleFailure(f"oracle command {self.name!r} failed: {exc}") from exc
        if proc.returncode != 0:
            raise OracleFailure(
                f"oracle command {self.name!r} exited with {proc.returncode}: "
                f"{proc.stderr.strip()[:200]}")
        lines = proc.stdout.splitlines()
        if len(lines) != len(texts) or any(l.strip() not in ("0", "1") for l in lines):
            raise OracleFailure(
                f"oracle command {self.name!r} returned {len(lines)} verdict lines "
                f"for {len(texts)} inputs")
        return [l.strip() == "1" for l in lines]


BUILTIN_ORACLES = {"anbncn": Oracle(anbncn), "anbncm": Oracle(anbncm)}


def make_oracle(spec: str, timeout: float = 60.0) -> Oracle:
    """``"anbncn"``, ``"anbncm"``, or ``"cmd:<command line>"``."""
    if spec in BUILTIN_ORACLES:
        return BUILTIN_ORACLES[spec]
    if spec.startswith("cmd:"):
        return CommandOracle(spec[4:], timeout)
    raise ValueError(f"unknown oracle {spec!r}")


@dataclass(frozen=True)
class LabeledExample:
    text: str
    label: bool
    provenance: tuple[str, float, int] = ("", 0.0, 0)


def label(oracle: Oracle, samples: Iterable[SampledSequence]
          ) -> tuple[list[LabeledExample], int]:
    """Label terminated samples; returns the examples and the dropped count."""
    samples = list(samples)
    kept = [s for s in samples if s.terminated]
    verdicts = oracle.batch([s.text for s in kept])
    examples = [LabeledExample(s.text, v, (s.instance_id, s.temperature, s.sample_index))
                for s, v in zip(kept, verdicts)]
    return examples, len(samples) - len(kept)


def _order(texts: Iterable[str]) -> tuple[str, ...]:
    return tuple(sorted(texts, key=lambda t: (len(t), t)))


@dataclass(frozen=True)
class ExampleSet:
    positives: tuple[str, ...] = ()
    negatives: tuple[str, ...] = ()
    duplicates: int = 0

    def __post_init__(self):
        object.__setattr__(self, "positives", _order(set(self.positives)))
        object.__setattr__(self, "negatives", _order(set(self.negatives)))
        clash = set(self.positives) & set(self.negatives)
        if clash:
            raise InconsistentOracle(f"strings labeled both ways: {sorted(clash)[:5]}")

    def __len__(self) -> int:
        return len(self.positives) + len(self.negatives)


def split_dedup(examples: Iterable[LabeledExample]) -> ExampleSet:
    seen: dict[str, bool] = {}
    n = 0
    for ex in examples:
        n += 1
        if seen.setdefault(ex.text, ex.label) != ex.label:
            raise InconsistentOracle(f"oracle gave both labels to {ex.text!r}")
    return ExampleSet(
        tuple(t for t, v in seen.items() if v),
        tuple(t for t, v in seen.items() if not v),
        duplicates=n - len(seen),
    )
