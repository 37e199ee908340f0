"""Plots for sdnn output directories.

    python scripts/plot.py metrics RUN_DIR [RUN_DIR ...]   # loss curves
    python scripts/plot.py field FIELD.csv                 # reference field heat map
"""

import argparse
import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def plot_metrics(dirs, out):
    fig, ax = plt.subplots(figsize=(7, 4))
    for d in dirs:
        rows = list(csv.DictReader(open(Path(d) / "metrics.csv")))
        epochs = [int(r["epoch"]) for r in rows]
        for key in ("total", "loss_pde"):
            ax.semilogy(epochs, [float(r[key]) for r in rows], label=f"{Path(d).name} {key}")
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out, dpi=150)


def plot_field(path, out):
    rows = list(csv.DictReader(open(path)))
    t = np.array(sorted({float(r["t"]) for r in rows}))
    x = np.array(sorted({float(r["x"]) for r in rows}))
    v = np.array([float(r["value"]) for r in rows]).reshape(len(t), len(x))
    fig, ax = plt.subplots(figsize=(7, 4))
    m = ax.pcolormesh(t, x, v.T, shading="auto", cmap="rainbow")
    fig.colorbar(m, ax=ax)
    ax.set_xlabel("t")
    ax.set_ylabel("x")
    fig.tight_layout()
    fig.savefig(out, dpi=150)


def main():
    p = argparse.ArgumentParser()
    sub = p.add_subparsers(dest="cmd", required=True)
    m = sub.add_parser("metrics")
    m.add_argument("dirs", nargs="+")
    m.add_argument("--out", default="metrics.png")
    f = sub.add_parser("field")
    f.add_argument("csv")
    f.add_argument("--out", default="field.png")
    a = p.parse_args()
    if a.cmd == "metrics":
        plot_metrics(a.dirs, a.out)
    else:
        plot_field(a.csv, a.out)


if __name__ == "__main__":
    main()
