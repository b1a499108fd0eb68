"""Character-level n-gram language model with Witten-Bell smoothing.

The model supplies the string prior: P(s) for a complete message s is the
chain-rule product of next-character probabilities, with the context
resetting at every ``.`` (each sentence is modeled independently).

Smoothing is recursive Witten-Bell interpolation:

    P_k(w | h) = lam_h * ML(w | h) + (1 - lam_h) * P_{k-1}(w | h')

with lam_h = c(h) / (c(h) + T(h)), where c(h) is the total count of context
h, T(h) the number of distinct continuations seen after h, and h' drops the
oldest character.  The base case is the uniform distribution over the
alphabet, so no string ever has probability zero.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .alphabet import DEFAULT_ALPHABET, STOP, Alphabet


class WittenBellNgram:
    """n-gram model over the 28-symbol alphabet.

    Follows the estimator convention: construct with hyperparameters, call
    :meth:`fit` with normalized text, then treat the model as immutable.
    An unfitted model is valid and predicts the uniform distribution.
    """

    def __init__(self, order: int = 3, alphabet: Alphabet | None = None):
        if order < 1:
            raise ValueError(f"order must be >= 1, got {order}")
        self.order = order
        self.alphabet = alphabet if alphabet is not None else DEFAULT_ALPHABET
        # context string -> per-character count vector
        self._counts: dict[str, np.ndarray] = {}
        self._dist_cache: dict[str, np.ndarray] = {}

    def get_params(self) -> dict:
        return {"order": self.order, "alphabet": self.alphabet.symbols}

    # -- training ---------------------------------------------------------

    def fit(self, text: str) -> "WittenBellNgram":
        """Count all contexts of length 0..order-1 occurring in `text`.

        `text` must be normalized (see :func:`treespeller.alphabet.normalize_corpus`).
        Contexts never cross a ``.`` boundary.
        """
        if not text:
            raise ValueError("training text is empty")
        bad = set(text) - set(self.alphabet.symbols)
        if bad:
            raise ValueError(f"text contains characters outside the alphabet: {sorted(bad)!r}")

        n = len(self.alphabet)
        counts = self._counts
        sent_start = 0
        for i, char in enumerate(text):
            ci = self.alphabet.index(char)
            history = text[max(sent_start, i - (self.order - 1)) : i]
            for k in range(len(history) + 1):
                ctx = history[len(history) - k :]
                vec = counts.get(ctx)
                if vec is None:
                    vec = np.zeros(n, dtype=np.int64)
                    counts[ctx] = vec
                vec[ci] += 1
            if char == STOP:
                sent_start = i + 1
        self._dist_cache.clear()
        return self

    # -- queries ----------------------------------------------------------

    def effective_context(self, context: str) -> str:
        """Last (order-1) characters of `context`, truncated at the last ``.``."""
        stop_at = context.rfind(STOP)
        if stop_at >= 0:
            context = context[stop_at + 1 :]
        if self.order > 1:
            return context[-(self.order - 1) :]
        return ""

    def next_char_dist(self, context: str) -> np.ndarray:
        """Witten-Bell smoothed distribution over the next character."""
        ctx = self.effective_context(context)
        cached = self._dist_cache.get(ctx)
        if cached is not None:
            return cached
        dist = self._wb(ctx)
        self._dist_cache[ctx] = dist
        return dist

    def _wb(self, ctx: str) -> np.ndarray:
        n = len(self.alphabet)
        if ctx == "":
            lower = np.full(n, 1.0 / n)
        else:
            lower = self._wb(ctx[1:])
        vec = self._counts.get(ctx)
        if vec is None:
            return lower
        total = int(vec.sum())
        if total == 0:
            return lower
        distinct = int(np.count_nonzero(vec))
        lam = total / (total + distinct)
        dist = lam * (vec / total) + (1.0 - lam) * lower
        return dist

    def log2_prob(self, context: str, char: str) -> float:
        return math.log2(self.next_char_dist(context)[self.alphabet.index(char)])

    def mean_entropy(self, text: str) -> float:
        """Average next-character entropy (bits) over every position of `text`."""
        if not text:
            raise ValueError("text is empty")
        total = 0.0
        sent_start = 0
        for i, _char in enumerate(text):
            ctx = text[max(sent_start, i - (self.order - 1)) : i]
            total += entropy_bits(self.next_char_dist(ctx))
            if text[i] == STOP:
                sent_start = i + 1
        return total / len(text)

    def string_bits(self, s: str) -> tuple[float, float]:
        """(-log2 P(s), bits per character) for a complete message `s`."""
        if not self.alphabet.is_valid_string(s):
            raise ValueError(f"not a complete message over the alphabet: {s!r}")
        bits = 0.0
        for i, char in enumerate(s):
            bits -= self.log2_prob(s[:i], char)
        return bits, bits / len(s)

    # -- persistence ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "alphabet": self.alphabet.symbols,
            "contexts": {ctx: vec.tolist() for ctx, vec in sorted(self._counts.items())},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "WittenBellNgram":
        model = cls(order=data["order"], alphabet=Alphabet(data["alphabet"]))
        for ctx, vals in data["contexts"].items():
            model._counts[ctx] = np.asarray(vals, dtype=np.int64)
        return model

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True, indent=None))

    @classmethod
    def load(cls, path: str | Path) -> "WittenBellNgram":
        return cls.from_dict(json.loads(Path(path).read_text()))


def entropy_bits(dist: np.ndarray) -> float:
    """Shannon entropy in bits; 0 log 0 := 0."""
    p = np.asarray(dist, dtype=float)
    nz = p > 0.0
    return float(-(p[nz] * np.log2(p[nz])).sum())
