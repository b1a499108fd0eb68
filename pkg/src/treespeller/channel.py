"""Noisy user-input channel: estimation, sampling, information, capacity.

The channel is a row-stochastic confusion matrix: entry (i, j) is the
probability that the system estimates symbol j when the user produced
symbol i.  Capacity and the capacity-achieving input prior are computed
with Blahut-Arimoto.  All information quantities are in bits.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

_ROW_TOL = 1e-9


class CalibrationError(ValueError):
    """A symbol has no calibration data (zero count row)."""


class CapacityError(RuntimeError):
    """Blahut-Arimoto failed to converge (degenerate matrix)."""


@dataclass(frozen=True)
class ConfusionMatrix:
    """Row-stochastic user response model, optionally with display angles."""

    probs: np.ndarray
    symbol_angles: np.ndarray | None = None

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 2 or probs.shape[0] != probs.shape[1] or probs.shape[0] < 2:
            raise ValueError(f"need a square matrix with >= 2 symbols, got shape {probs.shape}")
        if (probs < 0).any():
            raise ValueError("negative entries in confusion matrix")
        if np.abs(probs.sum(axis=1) - 1.0).max() > _ROW_TOL:
            raise ValueError("rows must sum to 1")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        if self.symbol_angles is not None:
            angles = np.asarray(self.symbol_angles, dtype=float)
            if angles.shape != (probs.shape[0],):
                raise ValueError("need one angle per symbol")
            if (np.diff(angles) <= 0).any() or angles[0] < 0 or angles[-1] >= 2 * np.pi:
                raise ValueError("angles must be strictly increasing in [0, 2*pi)")
            angles.setflags(write=False)
            object.__setattr__(self, "symbol_angles", angles)

    @property
    def n_symbols(self) -> int:
        return self.probs.shape[0]

    def sample(self, x: int, rng: np.random.Generator) -> int:
        """Draw a noisy estimate for true symbol `x`."""
        return int(self.sample_many(x, 1, rng)[0])

    def sample_many(self, x: int, n: int, rng: np.random.Generator) -> np.ndarray:
        """Draw `n` noisy estimates for true symbol `x`."""
        if not 0 <= x < self.n_symbols:
            raise ValueError(f"symbol index {x} out of range")
        return rng.choice(self.n_symbols, size=n, p=self.probs[x])

    def with_angles(self, angles: np.ndarray | None = None) -> "ConfusionMatrix":
        """Copy with display angles (default: evenly spaced from 0)."""
        if angles is None:
            angles = np.arange(self.n_symbols) * (2 * np.pi / self.n_symbols)
        return ConfusionMatrix(self.probs, np.asarray(angles, dtype=float))


def estimate_from_counts(counts: np.ndarray, smooth: bool = False) -> ConfusionMatrix:
    """Row-normalize a calibration count matrix.

    A zero row means a symbol was never calibrated; that is an error unless
    `smooth` adds an additive floor of 1/(row_trials + n) to every cell.
    """
    counts = np.asarray(counts, dtype=float)
    if (counts < 0).any():
        raise ValueError("counts must be nonnegative")
    row_sums = counts.sum(axis=1)
    if smooth:
        n = counts.shape[0]
        floor = 1.0 / (row_sums[:, None] + n)
        counts = counts + floor
        row_sums = counts.sum(axis=1)
    if (row_sums <= 0).any():
        bad = int(np.flatnonzero(row_sums <= 0)[0])
        raise CalibrationError(f"symbol {bad} has no calibration counts; drop it or pass smooth=True")
    return ConfusionMatrix(counts / row_sums[:, None])


def load_counts_csv(path: str | Path) -> np.ndarray:
    """Read a confusion-count CSV: row = true symbol, column = estimate."""
    with open(path, newline="") as fh:
        rows = [[int(cell) for cell in row] for row in csv.reader(fh) if row]
    return np.asarray(rows, dtype=np.int64)


def mutual_information(prior: np.ndarray, matrix: ConfusionMatrix) -> float:
    """I(X; X_hat) in bits for input distribution `prior`."""
    p = np.asarray(prior, dtype=float)
    if abs(p.sum() - 1.0) > 1e-6:
        raise ValueError("prior must sum to 1")
    w = matrix.probs
    q = p @ w  # output marginal
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(w > 0, w / np.where(q > 0, q, 1.0), 1.0)
        terms = np.where(w > 0, w * np.log2(ratio), 0.0)
    return float(max(0.0, (p[:, None] * terms).sum()))


@dataclass(frozen=True)
class ChannelCapacity:
    """Capacity in bits with the prior that achieves it."""

    capacity_bits: float
    optimal_prior: np.ndarray
    iterations: int
    tolerance_achieved: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "capacity_bits": self.capacity_bits,
                "optimal_prior": self.optimal_prior.tolist(),
                "iterations": self.iterations,
                "tolerance_achieved": self.tolerance_achieved,
            }
        )


def capacity(matrix: ConfusionMatrix, tol: float = 1e-9, max_iters: int = 10_000) -> ChannelCapacity:
    """Blahut-Arimoto from the uniform prior.

    Iterates until the standard upper/lower capacity gap (max_x D_x minus
    the current mutual information) drops below `tol`.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    w = matrix.probs
    n = matrix.n_symbols
    p = np.full(n, 1.0 / n)
    log2w = np.where(w > 0, np.log2(np.where(w > 0, w, 1.0)), 0.0)
    for it in range(1, max_iters + 1):
        q = p @ w
        with np.errstate(divide="ignore"):
            log2q = np.where(q > 0, np.log2(np.where(q > 0, q, 1.0)), 0.0)
        # D_x = KL(row_x || q) in bits
        d = (w * (log2w - log2q[None, :])).sum(axis=1)
        lower = float(p @ d)
        upper = float(d.max())
        gap = upper - lower
        if gap < tol:
            return ChannelCapacity(lower, p, it, gap)
        p = p * np.exp2(d)
        p /= p.sum()
    raise CapacityError(f"no convergence within {max_iters} iterations (gap {gap:.3g})")


def uniform_error_channel(n_symbols: int = 10, hit: float = 0.9, miss: float = 0.011) -> ConfusionMatrix:
    """The simulation channel: `hit` on the diagonal, `miss` elsewhere.

    The stated hit/miss pair need not sum to one across a row; rows are
    renormalized (for the default 10-symbol channel this is a <=0.1%
    adjustment).
    """
    probs = np.full((n_symbols, n_symbols), miss)
    np.fill_diagonal(probs, hit)
    probs /= probs.sum(axis=1, keepdims=True)
    return ConfusionMatrix(probs)
