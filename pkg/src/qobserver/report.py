"""Trace files and figures written by the command line tools."""

import csv
import os

import numpy as np

from .analysis import COLUMNS


def format_mu(mu):
    return np.format_float_positional(float(mu), trim="-")


def trace_path(out_dir, mu):
    return os.path.join(out_dir, f"mu_{format_mu(mu)}.csv")


def _cell(v):
    return "" if v is None else repr(float(v))


def write_trace_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def read_trace_csv(path):
    """Rows as lists of floats, with ``None`` for empty cells."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if tuple(header) != COLUMNS:
            raise ValueError(f"{path}: unexpected header {header}")
        return [[None if c == "" else float(c) for c in row] for row in r]


def write_summary_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) for v in row])


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_coefficients(traces, family, path):
    """Overlay plant coefficients with ``family`` ('k' or 'l') for each mu.

    ``traces`` maps mu to a list of rows as produced by ``trace_row``.
    """
    plt = _pyplot()
    col = {name: i for i, name in enumerate(COLUMNS)}
    fig, axes = plt.subplots(2, 2, figsize=(11, 7), sharex=True)
    for idx, ax in enumerate(axes.flat, start=1):
        first = next(iter(traces.values()))
        t = np.array([r[0] for r in first])
        if idx <= 2:
            ax.plot(t, [r[col[f"f{idx}"]] for r in first], "k", lw=2, label=f"f{idx}")
        else:
            ax.plot(t, np.zeros_like(t), "k", lw=2, label=f"f{idx} = 0")
        for mu, rows in traces.items():
            ax.plot(t, [r[col[f"{family}{idx}"]] for r in rows], lw=0.8, label=f"{family}{idx}, mu={format_mu(mu)}")
        ax.set_ylabel(f"coefficient {idx}")
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=7, loc="upper right")
    for ax in axes[1]:
        ax.set_xlabel("t")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_envelopes(mus, sup_g, bounds, sup_h, path):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(mus, sup_g, "o-", label="sup g1^2+g2^2")
    ax.loglog(mus, bounds, "--", label="analytic bound")
    ax.axhline(sup_h, color="k", lw=1, label="sup h1^2+h2^2")
    ax.set_xlabel("mu")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
