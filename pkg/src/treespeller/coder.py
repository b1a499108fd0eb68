"""Leaf-to-symbol coding: water-filling and the monotonic variant.

A coding function assigns each query-tree leaf one user symbol (symbols may
repeat).  The induced input prior is the per-symbol sum of leaf masses; its
mutual information with the channel output is the expected information a
query yields about the intended string.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ConfusionMatrix, mutual_information


@dataclass(frozen=True)
class CodingFunction:
    assignment: np.ndarray  # leaf index -> symbol index
    monotonic: bool
    induced_prior: np.ndarray
    expected_information_bits: float

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=np.int64)
        a.setflags(write=False)
        object.__setattr__(self, "assignment", a)
        p = np.asarray(self.induced_prior, dtype=float)
        p.setflags(write=False)
        object.__setattr__(self, "induced_prior", p)


def _induced_prior(leaf_masses: np.ndarray, assignment: np.ndarray, n_symbols: int) -> np.ndarray:
    prior = np.zeros(n_symbols)
    np.add.at(prior, assignment, leaf_masses)
    return prior


def waterfill(leaf_masses: np.ndarray, q: np.ndarray, matrix: ConfusionMatrix) -> CodingFunction:
    """Greedy assignment toward the optimal prior `q`.

    Leafs are processed in decreasing mass (ties: lower leaf index) and each
    goes to the symbol with the largest remaining deficit q(x) - P_X(x)
    (ties: lower symbol index).
    """
    masses = np.asarray(leaf_masses, dtype=float)
    q = np.asarray(q, dtype=float)
    order = sorted(range(len(masses)), key=lambda i: (-masses[i], i))
    filled = np.zeros(len(q))
    assignment = np.zeros(len(masses), dtype=np.int64)
    for i in order:
        x = int(np.argmax(q - filled))
        assignment[i] = x
        filled[x] += masses[i]
    info = mutual_information(filled, matrix)
    return CodingFunction(assignment, False, filled, info)


def expected_information(coding: CodingFunction, matrix: ConfusionMatrix) -> float:
    """Per-query expected information gain (bits) under the coding's prior."""
    return mutual_information(coding.induced_prior, matrix)


def monotonic_code(
    ordered_leaf_masses: np.ndarray,
    matrix: ConfusionMatrix,
    q: np.ndarray | None = None,
    max_iters: int = 100,
) -> CodingFunction:
    """Best coding under the display constraint: leaf order (clockwise, go-back
    first) maps to non-decreasing symbol angles.

    Such codings are exactly the partitions of the ordered leafs into
    contiguous (possibly empty) runs, one per symbol in angular order.  When
    the partition count is small we enumerate them all (vectorized) and the
    result is exact.  Beyond that we maximize a variational lower bound by
    coordinate ascent from several starts and polish with exact-objective
    boundary sweeps; this is a heuristic but lands within a few hundredths
    of a bit of the optimum in practice.
    """
    if matrix.symbol_angles is None:
        raise ValueError("monotonic coding requires symbol angles on the channel")
    masses = np.asarray(ordered_leaf_masses, dtype=float)
    n_sym = matrix.n_symbols
    if math.comb(len(masses) + n_sym - 1, n_sym - 1) <= _EXACT_PARTITION_LIMIT:
        info, assignment = _best_partition_exhaustive(masses, matrix)
    else:
        info, assignment = _monotonic_heuristic(masses, matrix, q, max_iters)
    prior = _induced_prior(masses, assignment, n_sym)
    return CodingFunction(assignment, True, prior, info)


_EXACT_PARTITION_LIMIT = 100_000


def _best_partition_exhaustive(masses: np.ndarray, matrix: ConfusionMatrix) -> tuple[float, np.ndarray]:
    """Vectorized sweep over every contiguous partition.

    Builds the (n_partitions, n_symbols) matrix of induced priors from
    prefix sums and scores mutual information in one batch.  Ties resolve
    to the lexicographically smallest cut tuple.
    """
    from itertools import combinations_with_replacement

    n_leaf, n_sym = len(masses), matrix.n_symbols
    prefix = np.concatenate([[0.0], np.cumsum(masses)])
    w = matrix.probs
    cuts = np.fromiter(
        (c for tup in combinations_with_replacement(range(n_leaf + 1), n_sym - 1) for c in tup),
        dtype=np.int64,
    ).reshape(-1, n_sym - 1)
    bounds = np.hstack([
        np.zeros((len(cuts), 1), dtype=np.int64),
        cuts,
        np.full((len(cuts), 1), n_leaf, dtype=np.int64),
    ])
    priors = prefix[bounds[:, 1:]] - prefix[bounds[:, :-1]]
    q_hat = priors @ w
    h_out = -np.where(q_hat > 0, q_hat * np.log2(np.where(q_hat > 0, q_hat, 1.0)), 0.0).sum(axis=1)
    row_entropy = -np.where(w > 0, w * np.log2(np.where(w > 0, w, 1.0)), 0.0).sum(axis=1)
    info = h_out - priors @ row_entropy
    i = int(np.argmax(info))
    assignment = np.zeros(n_leaf, dtype=np.int64)
    for j in range(n_sym):
        assignment[bounds[i, j] : bounds[i, j + 1]] = j
    return float(info[i]), assignment


def _monotonic_heuristic(
    masses: np.ndarray, matrix: ConfusionMatrix, q: np.ndarray | None, max_iters: int
) -> tuple[float, np.ndarray]:
    """Variational ascent: for a fixed reverse channel phi the lower bound
    J(p, phi) *is* run-separable, so the inner maximization is an exact
    O(|M|^2 |X|) dynamic program; phi is then reset to the posterior.

    Ascent is monotone in J but can land in local optima, so we collect
    candidate partitions from several starts (uniform prior, `q`, `q` with
    each single symbol masked out, and a direct total-variation match to
    `q`), polish each with exact-objective boundary sweeps, and keep the
    best.
    """
    n_sym = matrix.n_symbols
    w = matrix.probs

    starts = [np.full(n_sym, 1.0 / n_sym)]
    candidates: dict[bytes, np.ndarray] = {}
    if q is not None:
        q = np.asarray(q, dtype=float)
        starts.append(q)
        # the optimum sometimes leaves a run empty, which plain ascent never
        # discovers; starts with one symbol masked out steer the DP there
        for x in range(n_sym):
            masked = q.copy()
            masked[x] = 0.0
            if masked.sum() > 0:
                starts.append(masked / masked.sum())
        tv = _tv_match_dp(masses, q)
        candidates[tv.tobytes()] = tv

    for p in starts:
        seen: set[bytes] = set()
        assignment = None
        for _ in range(max_iters):
            c = _symbol_gains(p, w)
            assignment = _partition_dp(masses, c)
            key = assignment.tobytes()
            if key in seen:
                break
            seen.add(key)
            p = _induced_prior(masses, assignment, n_sym)
        candidates.setdefault(assignment.tobytes(), assignment)

    best: tuple[float, np.ndarray] | None = None
    for candidate in candidates.values():
        assignment = _polish_boundaries(masses, candidate, matrix)
        prior = _induced_prior(masses, assignment, n_sym)
        info = mutual_information(prior, matrix)
        if best is None or info > best[0] + 1e-15:
            best = (info, assignment)
    return best


def _symbol_gains(p: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Per-unit-mass gain c_x = sum_xhat W[x,xhat] log2 phi(x|xhat).

    phi is the posterior under prior p, blended with a tiny uniform floor so
    symbols currently holding zero mass keep a finite (if poor) gain and can
    be revived by the DP.  Any valid phi gives a legitimate lower bound.
    """
    delta = 1e-6
    q_hat = p @ w
    with np.errstate(divide="ignore", invalid="ignore"):
        post = (p[:, None] * w) / np.where(q_hat > 0, q_hat, 1.0)[None, :]
    phi = (1.0 - delta) * post + delta / len(p)
    return (w * np.log2(phi)).sum(axis=1)


def _polish_boundaries(
    masses: np.ndarray, assignment: np.ndarray, matrix: ConfusionMatrix, max_sweeps: int = 50
) -> np.ndarray:
    """Coordinate descent over run boundaries scoring the exact objective.

    The DP ascent optimizes a lower bound and can stall one boundary short
    of the optimum; sweeping each boundary over all positions (others
    fixed) with the true mutual information removes those stalls.
    """
    n_leaf = len(masses)
    n_sym = matrix.n_symbols
    # bounds[j] = first leaf index of symbol j's run; bounds[n_sym] = n_leaf
    bounds = np.searchsorted(assignment, np.arange(n_sym + 1), side="left")
    bounds[n_sym] = n_leaf

    def info_for(b: np.ndarray) -> float:
        a = np.zeros(n_leaf, dtype=np.int64)
        for j in range(n_sym):
            a[b[j] : b[j + 1]] = j
        return mutual_information(_induced_prior(masses, a, n_sym), matrix)

    current = info_for(bounds)
    for _ in range(max_sweeps):
        improved = False
        # single-boundary moves
        for j in range(1, n_sym):
            best_pos, best_info = bounds[j], current
            for pos in range(bounds[j - 1], bounds[j + 1] + 1):
                if pos == bounds[j]:
                    continue
                trial = bounds.copy()
                trial[j] = pos
                v = info_for(trial)
                if v > best_info + 1e-12:
                    best_pos, best_info = pos, v
            if best_pos != bounds[j]:
                bounds[j] = best_pos
                current = best_info
                improved = True
        # joint moves of two adjacent boundaries (re-sizes a whole run)
        for j in range(1, n_sym - 1):
            best_pair, best_info = (bounds[j], bounds[j + 1]), current
            for lo in range(bounds[j - 1], bounds[j + 2] + 1):
                for hi in range(lo, bounds[j + 2] + 1):
                    if (lo, hi) == (bounds[j], bounds[j + 1]):
                        continue
                    trial = bounds.copy()
                    trial[j], trial[j + 1] = lo, hi
                    v = info_for(trial)
                    if v > best_info + 1e-12:
                        best_pair, best_info = (lo, hi), v
            if best_pair != (bounds[j], bounds[j + 1]):
                bounds[j], bounds[j + 1] = best_pair
                current = best_info
                improved = True
        if not improved:
            break
    out = np.zeros(n_leaf, dtype=np.int64)
    for j in range(n_sym):
        out[bounds[j] : bounds[j + 1]] = j
    return out


def _tv_match_dp(masses: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Contiguous partition minimizing sum_x |run_mass - q_x| (separable,
    so this DP is exact).  Used as an ascent start: it naturally leaves
    symbols with small optimal-prior mass empty."""
    n_leaf, n_sym = len(masses), len(q)
    prefix = np.concatenate([[0.0], np.cumsum(masses)])
    neg_inf = -np.inf
    value = np.full((n_sym + 1, n_leaf + 1), neg_inf)
    choice = np.zeros((n_sym + 1, n_leaf + 1), dtype=np.int64)
    value[0][0] = 0.0
    for j in range(1, n_sym + 1):
        for i in range(n_leaf + 1):
            best_v, best_k = neg_inf, 0
            for k in range(i + 1):
                if value[j - 1][k] == neg_inf:
                    continue
                v = value[j - 1][k] - abs((prefix[i] - prefix[k]) - q[j - 1])
                if v > best_v + 1e-15:
                    best_v, best_k = v, k
            value[j][i] = best_v
            choice[j][i] = best_k
    assignment = np.zeros(n_leaf, dtype=np.int64)
    i = n_leaf
    for j in range(n_sym, 0, -1):
        k = choice[j][i]
        assignment[k:i] = j - 1
        i = k
    return assignment


def _partition_dp(masses: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Exact DP over contiguous runs maximizing sum_x [p_x c_x - p_x log2 p_x].

    Empty runs are allowed.  Ties resolve to the earliest split point, so the
    result is deterministic.
    """
    n_leaf = len(masses)
    n_sym = len(c)
    prefix = np.concatenate([[0.0], np.cumsum(masses)])

    def run_value(j: int, lo: int, hi: int) -> float:
        mass = prefix[hi] - prefix[lo]
        if mass <= 0.0:
            return 0.0
        return mass * c[j] - mass * np.log2(mass)

    neg_inf = -np.inf
    # value[j][i]: best over first i leafs using symbols 0..j-1
    value = np.full((n_sym + 1, n_leaf + 1), neg_inf)
    choice = np.zeros((n_sym + 1, n_leaf + 1), dtype=np.int64)
    value[0][0] = 0.0
    for j in range(1, n_sym + 1):
        for i in range(n_leaf + 1):
            best_v, best_k = neg_inf, 0
            for k in range(i + 1):
                if value[j - 1][k] == neg_inf:
                    continue
                v = value[j - 1][k] + run_value(j - 1, k, i)
                if v > best_v + 1e-15:
                    best_v, best_k = v, k
            value[j][i] = best_v
            choice[j][i] = best_k
    assignment = np.zeros(n_leaf, dtype=np.int64)
    i = n_leaf
    for j in range(n_sym, 0, -1):
        k = choice[j][i]
        assignment[k:i] = j - 1
        i = k
    return assignment


def brute_force_monotonic(masses: np.ndarray, matrix: ConfusionMatrix) -> tuple[float, np.ndarray]:
    """Enumerate every contiguous partition; test oracle for small instances."""
    from itertools import combinations_with_replacement

    masses = np.asarray(masses, dtype=float)
    n_leaf, n_sym = len(masses), matrix.n_symbols
    best_info, best_assign = -1.0, None
    # cut positions (with repetition) between leafs, one per symbol boundary
    for cuts in combinations_with_replacement(range(n_leaf + 1), n_sym - 1):
        assignment = np.zeros(n_leaf, dtype=np.int64)
        bounds = [0, *cuts, n_leaf]
        for j in range(n_sym):
            assignment[bounds[j] : bounds[j + 1]] = j
        prior = _induced_prior(masses, assignment, n_sym)
        info = mutual_information(prior, matrix)
        if info > best_info + 1e-15:
            best_info, best_assign = info, assignment
    return best_info, best_assign
