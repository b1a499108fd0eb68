"""Simulated typing experiments: modes x leaf budgets x repeated trials.

A simulated user always indicates the leaf whose region contains the
target string; the channel then corrupts that symbol.  Every cell of the
grid gets its own random stream derived from the master seed, so runs are
reproducible and cells are order-independent.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channel import ChannelCapacity, ConfusionMatrix, capacity, uniform_error_channel
from .engine import MODES, Session, SessionConfig


@dataclass(frozen=True)
class SimConfig:
    target: str = "hello world."
    modes: tuple[str, ...] = ("multi", "single", "monotonic")
    leaf_counts: tuple[int, ...] = (4, 8, 10, 16)
    trials_per_cell: int = 10
    alpha: float = 0.95
    seed: int = 0
    query_cap: int = 10_000

    def __post_init__(self):
        if self.trials_per_cell < 1:
            raise ValueError("need at least one trial per cell")
        for mode in self.modes:
            if mode not in MODES:
                raise ValueError(f"unknown mode {mode!r}")


@dataclass
class TrialResult:
    mode: str
    leaf_count: int
    trial: int
    queries_used: int
    decided: str
    correct: bool
    # one (H(M), expected information, realized surprise) triple per query
    per_query: list[tuple[float, float, float]] = field(default_factory=list)


def cell_rng(seed: int, mode: str, leaf_count: int, trial: int) -> np.random.Generator:
    """Documented stream-splitting rule: one child stream per trial keyed by
    (master seed, mode index, leaf count, trial index)."""
    return np.random.default_rng([seed, MODES.index(mode), leaf_count, trial])


def run_trial(
    lm,
    channel: ConfusionMatrix,
    config: SimConfig,
    mode: str,
    leaf_count: int,
    trial: int,
    channel_capacity: ChannelCapacity | None = None,
) -> TrialResult:
    rng = cell_rng(config.seed, mode, leaf_count, trial)
    session = Session(
        lm,
        channel,
        SessionConfig(n_leafs=leaf_count, alpha=config.alpha, mode=mode),
        channel_capacity=channel_capacity,
    )
    result = TrialResult(mode, leaf_count, trial, 0, "", False)
    while not session.decided:
        if result.queries_used >= config.query_cap:
            return result  # recorded as a failed trial, not a crash
        query = session.build_query()
        x = session.target_symbol(config.target)
        x_hat = channel.sample(x, rng)
        session.update(x_hat)
        result.queries_used += 1
        result.per_query.append(
            (query.h_m_bits, query.expected_information_bits, query.surprise_bits)
        )
    result.decided = session.decided_text
    result.correct = result.decided == config.target
    return result


def run_cell(
    lm,
    channel: ConfusionMatrix,
    config: SimConfig,
    mode: str,
    leaf_count: int,
    channel_capacity: ChannelCapacity | None = None,
) -> list[TrialResult]:
    if channel_capacity is None:
        channel_capacity = capacity(channel, tol=1e-9)
    return [
        run_trial(lm, channel, config, mode, leaf_count, t, channel_capacity)
        for t in range(config.trials_per_cell)
    ]


def run_grid(lm, config: SimConfig, channel: ConfusionMatrix | None = None) -> list[TrialResult]:
    if channel is None:
        channel = uniform_error_channel()
    cap = capacity(channel, tol=1e-9)
    results: list[TrialResult] = []
    for mode in config.modes:
        for leaf_count in config.leaf_counts:
            results.extend(run_cell(lm, channel, config, mode, leaf_count, cap))
    return results


def summarize(results: list[TrialResult]) -> dict:
    """Per-(mode, leaf count) means plus the multi/single query ratio."""
    cells: dict[tuple[str, int], dict] = {}
    for key in sorted({(r.mode, r.leaf_count) for r in results}):
        rows = [r for r in results if (r.mode, r.leaf_count) == key]
        queries = [r.queries_used for r in rows]
        expected = [b for r in rows for (_, b, _) in r.per_query]
        cells[key] = {
            "mode": key[0],
            "leaf_count": key[1],
            "trials": len(rows),
            "mean_queries": float(np.mean(queries)),
            "accuracy": float(np.mean([r.correct for r in rows])),
            "mean_expected_bits": float(np.mean(expected)) if expected else 0.0,
        }
    ratios = {}
    for (mode, leaf_count), cell in cells.items():
        if mode == "multi" and ("single", leaf_count) in cells:
            single = cells[("single", leaf_count)]["mean_queries"]
            if single > 0:
                ratios[str(leaf_count)] = cell["mean_queries"] / single
    return {
        "cells": [cells[k] for k in sorted(cells)],
        "multi_over_single_queries": ratios,
    }


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def emit_report(results: list[TrialResult], out_dir: str | Path) -> dict[str, Path]:
    """Write trials.csv (one row per trial), queries.csv (one row per query,
    for replotting the information scatter), and summary.json."""
    if not results:
        raise ValueError("no results to report")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    trials_path = out / "trials.csv"
    queries_path = out / "queries.csv"
    summary_path = out / "summary.json"

    with open(trials_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["mode", "leaf_count", "trial", "queries_used", "decided", "correct"])
        for r in results:
            writer.writerow([r.mode, r.leaf_count, r.trial, r.queries_used, r.decided, int(r.correct)])

    with open(queries_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["mode", "leaf_count", "trial", "query", "h_m_bits", "expected_bits", "surprise_bits"]
        )
        for r in results:
            for qi, (h_m, exp_bits, surprise) in enumerate(r.per_query):
                writer.writerow(
                    [r.mode, r.leaf_count, r.trial, qi, _fmt(h_m), _fmt(exp_bits), _fmt(surprise)]
                )

    summary_path.write_text(json.dumps(summarize(results), indent=2, sort_keys=True) + "\n")
    return {"trials": trials_path, "queries": queries_path, "summary": summary_path}
