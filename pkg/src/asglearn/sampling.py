"""Masked temperature sampling and the temperature-sweep exploration generator."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError, EmptyMask
from .earley import CFGMask
from .grammar import END, EndMarker, Grammar, Vocabulary

MaskFn = Callable[[str], "set[str | EndMarker]"]

DEFAULT_TEMPERATURES = tuple(round(0.1 * k, 1) for k in range(11))


@dataclass(frozen=True)
class ProblemInstance:
    id: str
    instruction: str = ""
    metadata: Mapping[str, object] = field(default_factory=dict)


@dataclass(frozen=True)
class GeneratorConfig:
    temperatures: tuple[float, ...] = DEFAULT_TEMPERATURES
    samples_per_temperature: int = 10
    max_tokens: int = 24
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "temperatures", tuple(float(t) for t in self.temperatures))
        if not self.temperatures:
            raise ConfigError("temperature schedule is empty")
        if len(set(self.temperatures)) != len(self.temperatures):
            raise ConfigError("temperatures must be distinct")
        if any(t < 0 or not math.isfinite(t) for t in self.temperatures):
            raise ConfigError("temperatures must be finite and nonnegative")
        if self.samples_per_temperature < 1 or self.max_tokens < 1:
            raise ConfigError("samples_per_temperature and max_tokens must be positive")


@dataclass(frozen=True)
class SampledSequence:
    instance_id: str
    temperature: float
    sample_index: int
    tokens: tuple[str, ...]
    terminated: bool

    @property
    def text(self) -> str:
        return "".join(self.tokens)


def cell_rng(seed: int, *key: int) -> np.random.Generator:
    """Counter-based stream for one (instance, sample, temperature) cell."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *key])))


def masked_distribution(scores: Sequence[float], allowed: Iterable[int],
                        tau: float) -> np.ndarray:
    """Softmax of ``scores / tau`` restricted to ``allowed``; zero elsewhere."""
    scores = np.asarray(scores, dtype=float)
    idx = np.array(sorted(set(allowed)), dtype=int)
    if idx.size == 0:
        raise EmptyMask("no allowed entries")
    probs = np.zeros_like(scores)
    if tau == 0:
        sub = scores[idx]
        probs[idx[np.argmax(sub)]] = 1.0
        return probs
    z = scores[idx] / tau
    z -= z.max()
    w = np.exp(z)
    probs[idx] = w / w.sum()
    return probs


def masked_step(scores: Sequence[float], allowed: Iterable[int], tau: float,
                rng: np.random.Generator) -> int:
    """Draw an entry index; ``tau == 0`` is greedy with ties to the lowest index."""
    probs = masked_distribution(scores, allowed, tau)
    if tau == 0:
        return int(np.argmax(probs))
    cdf = np.cumsum(probs)
    # side="right" skips zero-probability entries: their cdf equals the previous one
    return int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))


def sample_sequence(provider, instance: ProblemInstance, mask_fn: MaskFn, tau: float,
                    max_tokens: int, rng: np.random.Generator, sample_index: int = 0
                    ) -> SampledSequence:
    """Decode at most ``max_tokens`` steps; emitting the end marker terminates."""
    vocab: Vocabulary = provider.vocab
    tokens: list[str] = []
    text = ""
    for _ in range(max_tokens):
        allowed = mask_fn(text)
        if not allowed:
            raise EmptyMask(f"mask function returned no entries for prefix {text!r}")
        scores = provider.score(instance, tuple(tokens))
        choice = vocab.entries[masked_step(scores, (vocab.index(e) for e in allowed), tau, rng)]
        if choice is END:
            return SampledSequence(instance.id, tau, sample_index, tuple(tokens), True)
        tokens.append(choice)
        text += choice
    return SampledSequence(instance.id, tau, sample_index, tuple(tokens), False)


def explore(provider, mask_fn: MaskFn | Grammar, instances: Sequence[ProblemInstance],
            config: GeneratorConfig, workers: int = 1) -> list[SampledSequence]:
    """All ``M * N * |T|`` cells, sorted by (instance, temperature, sample).

    Passing a :class:`Grammar` as ``mask_fn`` samples under its CFG mask.
    """
    if isinstance(mask_fn, Grammar):
        mask_fn = CFGMask(mask_fn, provider.vocab)
    ids = [inst.id for inst in instances]
    if len(set(ids)) != len(ids):
        raise ConfigError("problem instance ids must be unique")
    cells = [(i, j, k) for i in range(len(instances))
             for k in range(len(config.temperatures))
             for j in range(config.samples_per_temperature)]

    def run(cell):
        i, j, k = cell
        rng = cell_rng(config.seed, i, j, k)
        return cell, sample_sequence(provider, instances[i], mask_fn, config.temperatures[k],
                                     config.max_tokens, rng, sample_index=j)

    if workers > 1 and getattr(provider, "reentrant", False):
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run, cells))
    else:
        results = [run(c) for c in cells]
    results.sort(key=lambda r: (r[0][0], r[0][2], r[0][1]))
    return [seq for _, seq in results]
