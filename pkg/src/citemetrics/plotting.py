"""Optional figure rendering for the report subcommands.

Every function takes the same rows the CSV writer receives and saves a
figure next to it. Rendering is strictly additive: the delimited output
stays the canonical artifact, and nothing here feeds back into the
metrics.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_rank_figure(rows: list[dict], path, label_key: str, score_key: str = "score",
                     title: str = "", top: int = 20) -> None:
    rows = rows[:top]
    labels = [str(r[label_key])[:40] for r in rows][::-1]
    scores = [r[score_key] for r in rows][::-1]
    fig, ax = plt.subplots(figsize=(8, max(2.5, 0.3 * len(rows) + 1)))
    ax.barh(np.arange(len(rows)), scores, color="#3572b0")
    ax.set_yticks(np.arange(len(rows)))
    ax.set_yticklabels(labels, fontsize=8)
    ax.set_xlabel(score_key)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_timeseries_figure(rows: list[dict], path, title: str = "", top: int = 8) -> None:
    totals: dict = {}
    for r in rows:
        totals[r["group"]] = totals.get(r["group"], 0.0) + r["value"]
    keep = [g for g, _ in sorted(totals.items(), key=lambda kv: -kv[1])[:top]]
    fig, ax = plt.subplots(figsize=(8, 5))
    for group in keep:
        pts = [(r["year"], r["pct_of_world"]) for r in rows if r["group"] == group]
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], label=str(group)[:30], lw=1.5)
    ax.set_xlabel("year")
    ax.set_ylabel("% of world total")
    ax.legend(fontsize=7, ncol=2)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_trends_figure(rows: list[dict], path, title: str = "") -> None:
    years = [r["year"] for r in rows]
    fig, axes = plt.subplots(2, 2, figsize=(10, 7), sharex=True)
    axes[0, 0].plot(years, [r["n_papers"] for r in rows], color="green")
    axes[0, 0].set_ylabel("papers / year")
    axes[0, 1].plot(years, [r["mean_refs_declared"] for r in rows], color="red", label="references")
    axes[0, 1].plot(years, [r["mean_authors"] for r in rows], color="magenta", label="authors")
    axes[0, 1].set_ylabel("mean per paper")
    axes[0, 1].legend(fontsize=8)
    axes[1, 0].plot(years, [r["mean_citations"] for r in rows], color="blue", label="all citers")
    axes[1, 0].plot(years, [r["mean_citations_published"] for r in rows],
                    color="blue", ls="--", label="published citers")
    axes[1, 0].set_ylabel("mean citations")
    axes[1, 0].legend(fontsize=8)
    axes[1, 1].plot(years, [r["birth_pct"] for r in rows], color="green", label="appeared")
    axes[1, 1].plot(years, [r["death_pct"] for r in rows], color="red", label="disappeared")
    axes[1, 1].set_ylabel("% of active authors")
    axes[1, 1].legend(fontsize=8)
    for ax in axes[1]:
        ax.set_xlabel("year")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_correlations_figure(kinds: list[str], matrix: np.ndarray, path,
                             title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(1.0 + 0.8 * len(kinds), 1.0 + 0.8 * len(kinds)))
    im = ax.imshow(matrix, vmin=-1.0, vmax=1.0, cmap="RdBu_r")
    ax.set_xticks(range(len(kinds)))
    ax.set_yticks(range(len(kinds)))
    ax.set_xticklabels(kinds, rotation=45, ha="right", fontsize=8)
    ax.set_yticklabels(kinds, fontsize=8)
    for i in range(len(kinds)):
        for j in range(len(kinds)):
            v = matrix[i, j]
            ax.text(j, i, "-" if np.isnan(v) else f"{v:.2f}",
                    ha="center", va="center", fontsize=7)
    fig.colorbar(im, shrink=0.8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
