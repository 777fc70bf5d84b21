"""Logit providers: stand-ins for a language model's next-token scores.

A provider exposes ``vocab`` and ``score(instance, prefix_tokens)``, which
returns one finite float per vocabulary entry, the end marker last.
"""
from __future__ import annotations

import json
import math
import time
import urllib.error
import urllib.request
from collections import Counter, defaultdict
from typing import Sequence

import numpy as np

from .errors import ProviderError
from .grammar import Vocabulary
from .sampling import ProblemInstance


class LogitProvider:
    vocab: Vocabulary
    # safe to call from several threads at once
    reentrant = True

    def score(self, instance: ProblemInstance, prefix: Sequence[str]) -> np.ndarray:
        raise NotImplementedError


class UniformProvider(LogitProvider):
    def __init__(self, vocab: Vocabulary):
        self.vocab = vocab

    def score(self, instance, prefix):
        return np.zeros(len(self.vocab))


class StaticProvider(LogitProvider):
    """Same scores at every step, whatever the prefix."""

    def __init__(self, vocab: Vocabulary, scores: Sequence[float]):
        if len(scores) != len(vocab):
            raise ValueError("one score per vocabulary entry (end marker last)")
        self.vocab = vocab
        self._scores = np.asarray(scores, dtype=float)

    def score(self, instance, prefix):
        return self._scores.copy()


_BOS, _EOS = "\x02", "\x03"


class NGramProvider(LogitProvider):
    """Order-``k`` character model with add-one smoothing.

    Fitted on ``exemplars`` plus any ``metadata["exemplars"]`` of the instance
    being scored; a token scores the sum of its characters' log-probabilities
    and the end marker scores the log-probability of ending here.
    """

    def __init__(self, vocab: Vocabulary, exemplars: Sequence[str], order: int = 3):
        if order < 1:
            raise ValueError("order must be at least 1")
        self.vocab = vocab
        self.order = order
        self.exemplars = tuple(exemplars)
        self.alphabet = sorted({ch for tok in vocab.tokens for ch in tok})
        self._models: dict[tuple[str, ...], dict[str, Counter]] = {}

    def _fit(self, strings: tuple[str, ...]) -> dict[str, Counter]:
        model = self._models.get(strings)
        if model is None:
            model = defaultdict(Counter)
            pad = _BOS * (self.order - 1)
            for s in strings:
                padded = pad + s + _EOS
                for i in range(self.order - 1, len(padded)):
                    model[padded[i - self.order + 1:i]][padded[i]] += 1
            self._models[strings] = model
        return model

    def _logprob(self, model, ctx: str, ch: str) -> float:
        counts = model.get(ctx)
        total = sum(counts.values()) if counts else 0
        hits = counts[ch] if counts else 0
        return math.log((hits + 1) / (total + len(self.alphabet) + 1))

    def score(self, instance, prefix):
        extra = tuple(instance.metadata.get("exemplars", ())) if instance is not None else ()
        model = self._fit(self.exemplars + extra)
        k = self.order - 1
        history = _BOS * k + "".join(prefix)
        out = np.empty(len(self.vocab))
        for n, tok in enumerate(self.vocab.tokens):
            ctx, s = history, 0.0
            for ch in tok:
                s += self._logprob(model, ctx[len(ctx) - k:] if k else "", ch)
                ctx += ch
            out[n] = s
        out[-1] = self._logprob(model, history[len(history) - k:] if k else "", _EOS)
        return out


class RemoteProvider(LogitProvider):
    """Scores fetched from a logits server.

    Each request POSTs one JSON line ``{"instance_id", "prefix_tokens",
    "vocabulary_id"}``; the reply is ``{"scores": [...]}`` aligned to
    vocabulary order with the end marker last.
    """

    def __init__(self, url: str, vocab: Vocabulary, timeout: float = 10.0, retries: int = 2,
                 vocabulary_id: str | None = None):
        self.url = url
        self.vocab = vocab
        self.timeout = timeout
        self.retries = retries
        self.vocabulary_id = vocabulary_id or vocab.vocabulary_id

    def score(self, instance, prefix):
        payload = json.dumps({
            "instance_id": instance.id,
            "prefix_tokens": list(prefix),
            "vocabulary_id": self.vocabulary_id,
        }) + "\n"
        last_error: Exception | None = None
        for attempt in range(self.retries + 1):
            req = urllib.request.Request(
                self.url, data=payload.encode(), method="POST",
                headers={"Content-Type": "application/json"})
            try:
                with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                    body = json.loads(resp.read().decode().strip().splitlines()[0])
                break
            except (urllib.error.URLError, OSError, ValueError, IndexError) as exc:
                last_error = exc
                if attempt < self.retries:
                    time.sleep(0.05 * 2 ** attempt)
        else:
            raise ProviderError(f"logits server {self.url} failed: {last_error}")
        scores = body.get("scores") if isinstance(body, dict) else None
        if not isinstance(scores, list) or len(scores) != len(self.vocab):
            raise ProviderError(f"expected {len(self.vocab)} scores from {self.url}")
        arr = np.asarray(scores, dtype=float)
        if not np.all(np.isfinite(arr)):
            raise ProviderError("logits server returned non-finite scores")
        return arr
