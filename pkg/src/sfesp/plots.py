"""Plotting recipes for the harness CSVs (needs the ``plot`` extra).

The solvers never import this module; it only reads files written by
``sfesp compare``, ``sfesp simulate`` and ``sfesp export-fixtures``::

    python -m sfesp.plots compare results.csv --out compare.png
    python -m sfesp.plots sim sim.csv --out sim.png
    python -m sfesp.plots profiles fixtures/accuracy.csv --out profiles.png
"""

from __future__ import annotations

import argparse
import csv
import sys
from collections import defaultdict
from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .harness import read_csv  # noqa: E402
from .sim import read_report_csv  # noqa: E402


def plot_compare(csv_path, out, metric: str = "admitted_clean"):
    """One panel per (dims, accuracy level, latency level): mean +- std of ``metric`` vs requested tasks."""
    rows = read_csv(csv_path)
    cells = sorted({(r["dims"], r["accuracy_level"], r["latency_level"]) for r in rows})
    ncol = min(3, max(1, len(cells)))
    nrow = -(-len(cells) // ncol) if cells else 1
    fig, axes = plt.subplots(nrow, ncol, figsize=(4.2 * ncol, 3.2 * nrow), squeeze=False)
    for ax, cell in zip(axes.flat, cells):
        by_algo = defaultdict(lambda: defaultdict(list))
        for r in rows:
            if (r["dims"], r["accuracy_level"], r["latency_level"]) == cell:
                by_algo[r["algo"]][r["n_tasks"]].append(r[metric])
        for algo in sorted(by_algo):
            ns = sorted(by_algo[algo])
            mean = np.array([np.mean(by_algo[algo][n]) for n in ns])
            std = np.array([np.std(by_algo[algo][n]) for n in ns])
            ax.errorbar(ns, mean, yerr=std, marker="o", capsize=2, label=algo)
        ax.set_title(f"m={cell[0]}, acc={cell[1]}, lat={cell[2]}", fontsize=9)
        ax.set_xlabel("requested tasks")
        ax.set_ylabel(metric.replace("_", " "))
        ax.grid(alpha=0.3)
    for ax in list(axes.flat)[len(cells):]:
        ax.axis("off")
    if cells:
        axes.flat[0].legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return fig


def plot_sim(csv_path, out):
    """Latency against time per task, with thresholds, plus the allocated RBG/GPU units."""
    rows = read_report_csv(csv_path)
    tasks = sorted({r["task_id"] for r in rows})
    fig, (ax_l, ax_r) = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    all_periods = sorted({r["period"] for r in rows})
    starts = [min(r["timestamp"] for r in rows if r["period"] == p) for p in all_periods]
    span = starts[1] - starts[0] if len(starts) > 1 else max((r["timestamp"] for r in rows), default=0.0) or 1.0
    edges = starts + [starts[-1] + span] if starts else []
    for i, tid in enumerate(tasks):
        color = colors[i % len(colors)]
        rs = [r for r in rows if r["task_id"] == tid]
        key = "-".join(map(str, tid))
        t, v = [], []
        for p in all_periods:
            pts = [(r["timestamp"], r["latency"]) for r in rs if r["period"] == p and r["latency"] is not None]
            if pts:
                t += [x for x, _ in pts] + [np.nan]
                v += [y for _, y in pts] + [np.nan]
        if t:
            ax_l.plot(t, v, lw=0.8, color=color, label=f"task {key}")
        ax_l.axhline(rs[0]["threshold"], color=color, ls="--", lw=0.8)
        rbg = [next((r["rbg"] for r in rs if r["period"] == p), 0) for p in all_periods]
        gpu = [next((r["gpu_equivalents"] for r in rs if r["period"] == p), 0) for p in all_periods]
        ax_r.stairs(rbg, edges, color=color, label=f"{key} RBG")
        ax_r.stairs(gpu, edges, color=color, ls=":", label=f"{key} GPU")
    ax_l.set_ylabel("latency (s)")
    ax_r.set_ylabel("units")
    ax_r.set_xlabel("time (s)")
    if tasks:
        ax_l.legend(fontsize=7)
        ax_r.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return fig


def plot_profiles(csv_path, out):
    """Accuracy against compression factor for every profile in an accuracy CSV."""
    curves = defaultdict(list)
    with open(csv_path, newline="") as fh:
        for r in csv.DictReader(fh):
            curves[r["profile_id"]].append((float(r["z"]), float(r["accuracy"])))
    fig, ax = plt.subplots(figsize=(6, 4))
    for pid in sorted(curves):
        z, a = zip(*sorted(curves[pid]))
        ax.plot(z, a, marker=".", label=pid, ls="--" if pid.endswith("-All") else "-")
    ax.set_xscale("log")
    ax.set_xlabel("compression factor z")
    ax.set_ylabel("accuracy")
    ax.legend(fontsize=6, ncol=2)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return fig


RECIPES = {"compare": plot_compare, "sim": plot_sim, "profiles": plot_profiles}


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = argparse.ArgumentParser(prog="python -m sfesp.plots", description="Render harness CSVs.")
    ap.add_argument("kind", choices=sorted(RECIPES))
    ap.add_argument("csv")
    ap.add_argument("--out", help="image path (default: CSV name with .png)")
    args = ap.parse_args(argv)
    out = args.out or str(Path(args.csv).with_suffix(".png"))
    try:
        RECIPES[args.kind](args.csv, out)
    except (OSError, KeyError, ValueError) as exc:
        print(f"plots: error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
