"""Command-line entry points."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import data_path
from .alphabet import normalize_corpus
from .caplab import convergence_study, emit_csv
from .channel import capacity as channel_capacity
from .channel import estimate_from_counts, load_counts_csv, uniform_error_channel
from .lm import WittenBellNgram
from .sim import SimConfig, emit_report, run_grid, summarize


def _load_lm(corpus: str | None, order: int) -> WittenBellNgram:
    path = Path(corpus) if corpus else data_path("desk_corpus.txt")
    text = normalize_corpus(path.read_text(encoding="utf-8", errors="replace"))
    return WittenBellNgram(order=order).fit(text)


@click.group()
def main():
    """Capacity-approaching prefix-tree text entry."""


@main.command()
@click.argument("src", type=click.Path(exists=True))
@click.argument("dst", type=click.Path())
def normalize(src, dst):
    """Normalize a raw corpus file to the 28-symbol alphabet."""
    text = normalize_corpus(Path(src).read_text(encoding="utf-8", errors="replace"))
    Path(dst).write_text(text)
    click.echo(f"wrote {len(text)} characters to {dst}")


@main.command("train-lm")
@click.argument("corpus", type=click.Path(exists=True))
@click.argument("model_out", type=click.Path())
@click.option("--order", default=3, show_default=True)
def train_lm(corpus, model_out, order):
    """Train an n-gram model and save it as JSON."""
    model = _load_lm(corpus, order)
    model.save(model_out)
    text = normalize_corpus(Path(corpus).read_text(encoding="utf-8", errors="replace"))
    click.echo(f"mean entropy: {model.mean_entropy(text):.4f} bits/char")


@main.command("capacity")
@click.argument("counts_csv", type=click.Path(exists=True))
@click.option("--tol", default=1e-9, show_default=True)
@click.option("--smooth", is_flag=True, help="Additive floor for uncalibrated symbols.")
def capacity_cmd(counts_csv, tol, smooth):
    """Channel capacity report (JSON) from a confusion-count CSV."""
    matrix = estimate_from_counts(load_counts_csv(counts_csv), smooth=smooth)
    click.echo(channel_capacity(matrix, tol=tol).to_json())


@main.command()
@click.option("--corpus", type=click.Path(exists=True), default=None, help="Defaults to the bundled desk corpus.")
@click.option("--order", default=3, show_default=True)
@click.option("--target", default="hello world.", show_default=True)
@click.option("--modes", default="multi,single,monotonic", show_default=True)
@click.option("--leafs", default="4,8,10,16", show_default=True, help="Comma list of leaf budgets.")
@click.option("--trials", default=10, show_default=True)
@click.option("--alpha", default=0.95, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_dir", default="sim_out", show_default=True)
@click.option("--query-cap", default=10_000, show_default=True)
@click.option("--strict", is_flag=True, help="Exit nonzero on any incorrect decision.")
def sim(corpus, order, target, modes, leafs, trials, alpha, seed, out_dir, query_cap, strict):
    """Run the simulated typing grid and emit CSV/JSON reports."""
    lm = _load_lm(corpus, order)
    config = SimConfig(
        target=target,
        modes=tuple(modes.split(",")),
        leaf_counts=tuple(int(x) for x in leafs.split(",")),
        trials_per_cell=trials,
        alpha=alpha,
        seed=seed,
        query_cap=query_cap,
    )
    results = run_grid(lm, config)
    paths = emit_report(results, out_dir)
    summary = summarize(results)
    click.echo(json.dumps(summary["multi_over_single_queries"], indent=2))
    click.echo(f"reports in {paths['summary'].parent}")
    if strict and any(not r.correct for r in results):
        click.echo("strict mode: at least one incorrect decision", err=True)
        sys.exit(1)


@main.command()
@click.option("--m-counts", default="16,64,256", show_default=True)
@click.option("--source", type=click.Choice(["synthetic", "algorithm1"]), default="synthetic", show_default=True)
@click.option("--corpus", type=click.Path(exists=True), default=None)
@click.option("--order", default=3, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_csv", default="caplab.csv", show_default=True)
def caplab(m_counts, source, corpus, order, seed, out_csv):
    """Capacity-convergence study on the simulation channel."""
    matrix = uniform_error_channel()
    cap = channel_capacity(matrix, tol=1e-9)
    lm = _load_lm(corpus, order) if source == "algorithm1" else None
    points = convergence_study(
        matrix,
        [int(x) for x in m_counts.split(",")],
        mass_source=source,
        seed=seed,
        lm=lm,
        channel_capacity=cap,
    )
    emit_csv(points, out_csv)
    ok = all(
        pt.info_bits <= cap.capacity_bits + 1e-9 and pt.tv_distance <= pt.bound + 1e-9
        for pt in points
    )
    for pt in points:
        click.echo(
            f"|M|={pt.m_count:5d}  tv={pt.tv_distance:.5f}  bound={pt.bound:.5f}  "
            f"I={pt.info_bits:.4f}/{cap.capacity_bits:.4f} bits"
        )
    click.echo("PASS" if ok else "FAIL")
    if not ok:
        sys.exit(1)


@main.command()
@click.option("--host", default=None, help="Overrides TREESPELLER_HOST (default 127.0.0.1).")
@click.option("--port", default=None, type=int, help="Overrides TREESPELLER_PORT (default 8573).")
@click.option("--session-ttl", default=None, type=float)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None, help="JSON config file.")
def serve(host, port, session_ttl, config_path):
    """Run the session service."""
    import os

    import uvicorn

    from .server import create_app

    settings = {}
    if config_path:
        settings = json.loads(Path(config_path).read_text())
    host = host or os.environ.get("TREESPELLER_HOST") or settings.get("host", "127.0.0.1")
    port = port or int(os.environ.get("TREESPELLER_PORT") or settings.get("port", 8573))
    app = create_app(
        session_ttl=session_ttl if session_ttl is not None else settings.get("session_ttl"),
        default_alpha=settings.get("alpha", 0.95),
        default_n_leafs=settings.get("n_leafs", 10),
        default_mode=settings.get("mode", "multi"),
    )
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
