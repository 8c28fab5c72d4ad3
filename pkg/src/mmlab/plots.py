"""Figure rendering for cost reports; file output only, no display."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def exponent_figure(ns, values, limit: float, path: str) -> str:
    """Exponent-vs-parameter curve with its limiting value as a baseline."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogx(list(ns), list(values), marker="o", label="exponent")
    ax.axhline(limit, linestyle="--", color="gray",
               label=f"limit {limit:.6f}")
    ax.set_xlabel("N = S")
    ax.set_ylabel("exponent")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def series_figure(xs, ys, xlabel: str, ylabel: str, path: str,
                  logx: bool = False) -> str:
    fig, ax = plt.subplots(figsize=(6, 4))
    (ax.semilogx if logx else ax.plot)(list(xs), list(ys), marker="o")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path
