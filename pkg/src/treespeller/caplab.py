"""Capacity-convergence lab.

Checks, empirically, that water-filled leaf priors approach the optimal
input prior (in total variation, at rate at most 2|X|/|M| when every leaf
mass is at most 2/|M|) and that the induced mutual information approaches
channel capacity as the leaf budget grows.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channel import ChannelCapacity, ConfusionMatrix, capacity
from .coder import waterfill
from .lm import entropy_bits
from .tree import select_tree


@dataclass(frozen=True)
class ConvergencePoint:
    m_count: int
    tv_distance: float
    info_bits: float
    bound: float  # 2|X| / |M|
    entropy_gap: float  # H(P_xhat) - H(Q_xhat), expected -> 0
    max_leaf_mass: float


def synthetic_masses(m_count: int, rng: np.random.Generator) -> np.ndarray:
    """Random leaf masses with every entry capped at 2/|M|.

    Draws a flat Dirichlet and repeatedly clips-and-redistributes until the
    cap holds, mirroring the hypothesis under which the convergence bound
    is stated.
    """
    cap = 2.0 / m_count
    masses = rng.dirichlet(np.ones(m_count))
    for _ in range(200):
        over = masses > cap
        if not over.any():
            return masses
        excess = float((masses[over] - cap).sum())
        masses[over] = cap
        under = ~over
        headroom = cap - masses[under]
        masses[under] += excess * headroom / headroom.sum()
    raise RuntimeError("mass capping failed to converge")


def algorithm1_masses(lm, m_count: int) -> np.ndarray:
    """Leaf masses from a greedy tree selection over the language-model
    prior (empty root, no evidence).  These may violate the 2/|M| cap."""
    from .engine import Posterior

    posterior = Posterior(lm)
    tree = select_tree(posterior.next_char_dist, "", 1.0, m_count, posterior.alphabet)
    masses = np.array([leaf.mass for leaf in tree.leafs])
    return masses / masses.sum()


def convergence_study(
    matrix: ConfusionMatrix,
    m_counts: list[int],
    mass_source: str = "synthetic",
    seed: int = 0,
    lm=None,
    channel_capacity: ChannelCapacity | None = None,
) -> list[ConvergencePoint]:
    if list(m_counts) != sorted(m_counts):
        raise ValueError("m_counts must be increasing")
    if mass_source not in ("synthetic", "algorithm1"):
        raise ValueError(f"unknown mass source {mass_source!r}")
    if mass_source == "algorithm1" and lm is None:
        raise ValueError("algorithm1 mass source needs a language model")
    cap = channel_capacity if channel_capacity is not None else capacity(matrix, tol=1e-9)
    q = cap.optimal_prior
    q_hat = q @ matrix.probs
    points = []
    rng = np.random.default_rng(seed)
    for m_count in m_counts:
        if mass_source == "synthetic":
            masses = synthetic_masses(m_count, rng)
        else:
            masses = algorithm1_masses(lm, m_count)
        coding = waterfill(masses, q, matrix)
        p = coding.induced_prior
        p_hat = p @ matrix.probs
        points.append(
            ConvergencePoint(
                m_count=m_count,
                tv_distance=float(np.abs(q - p).sum()),
                info_bits=coding.expected_information_bits,
                bound=2.0 * matrix.n_symbols / m_count,
                entropy_gap=entropy_bits(p_hat) - entropy_bits(q_hat),
                max_leaf_mass=float(masses.max()),
            )
        )
    return points


def goback_condition_check(q: np.ndarray, goback_mass: float) -> bool:
    """The mild side condition under which the convergence argument still
    covers the (unsplittable) go-back leaf: its mass must dominate the
    largest optimal-prior entry.  Vacuously true with no go-back leaf."""
    if goback_mass < 0:
        raise ValueError("goback mass must be nonnegative")
    if goback_mass == 0.0:
        return True
    return float(np.max(q)) < goback_mass


def emit_csv(points: list[ConvergencePoint], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["m_count", "tv_distance", "info_bits", "bound", "entropy_gap", "max_leaf_mass"]
        )
        for pt in points:
            writer.writerow(
                [
                    pt.m_count,
                    format(pt.tv_distance, ".12g"),
                    format(pt.info_bits, ".12g"),
                    format(pt.bound, ".12g"),
                    format(pt.entropy_gap, ".12g"),
                    format(pt.max_leaf_mass, ".12g"),
                ]
            )
