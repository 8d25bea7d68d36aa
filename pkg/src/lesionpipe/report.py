"""Report serialization and the figures rendered next to the delimited output."""

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def write_json(doc: dict, path) -> None:
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def write_csv(path, header: list, rows: list) -> None:
    lines = [",".join(header)]
    lines += [",".join(str(v) for v in row) for row in rows]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def dice_histogram(dices, path, min_dice: float | None = None, title: str = "Overlap distribution") -> None:
    """Histogram of per-case dice values with an optional review-threshold marker."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(np.asarray(dices, dtype=float), bins=np.linspace(0.0, 1.0, 21), color="#4878b0", edgecolor="white")
    if min_dice is not None:
        ax.axvline(min_dice, color="#c44e52", linestyle="--", linewidth=1.2, label=f"review threshold {min_dice:g}")
        ax.legend(frameon=False)
    ax.set_xlabel("DICE")
    ax.set_ylabel("cases")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def pvalue_heatmap(matrix, labels, path, title: str = "Pairwise t-test p-values") -> None:
    """Annotated grid of pairwise p-values between accuracy distributions."""
    mat = np.asarray(matrix, dtype=float)
    fig, ax = plt.subplots(figsize=(1.4 * len(labels) + 2.4, 1.2 * len(labels) + 1.8))
    im = ax.imshow(mat, vmin=0.0, vmax=1.0, cmap="viridis")
    ax.set_xticks(range(len(labels)), labels, rotation=30, ha="right")
    ax.set_yticks(range(len(labels)), labels)
    for i in range(len(labels)):
        for j in range(len(labels)):
            ax.text(j, i, f"{mat[i, j]:.3f}", ha="center", va="center",
                    color="white" if mat[i, j] < 0.6 else "black", fontsize=9)
    fig.colorbar(im, ax=ax, shrink=0.85, label="p")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def accuracy_bars(names, means, path, title: str = "Cross-validated accuracy") -> None:
    fig, ax = plt.subplots(figsize=(1.2 * len(names) + 2.5, 4))
    ax.bar(range(len(names)), means, color="#4878b0")
    ax.set_xticks(range(len(names)), names, rotation=30, ha="right")
    ax.set_ylim(0.0, 1.0)
    ax.set_ylabel("accuracy")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def merge_reports(paths: list) -> dict:
    """Combine JSON reports into one document keyed by file stem."""
    merged = {}
    for p in paths:
        p = Path(p)
        key = p.stem
        if key in merged:
            raise ValueError(f"duplicate report stem {key!r}")
        merged[key] = read_json(p)
    return merged


def render_merged_figures(merged: dict, out_dir) -> list:
    """Best-effort figures for a merged report; returns the files written."""
    out_dir = Path(out_dir)
    written = []
    for key, doc in merged.items():
        if isinstance(doc, dict) and "cases" in doc and isinstance(doc["cases"], list):
            dices = [c.get("dice") for c in doc["cases"] if isinstance(c, dict) and "dice" in c]
            if dices:
                fig_path = out_dir / f"{key}_dice_histogram.png"
                dice_histogram(dices, fig_path, title=f"Overlap distribution: {key}")
                written.append(fig_path)
        if isinstance(doc, dict) and "p_values" in doc and "labels" in doc:
            fig_path = out_dir / f"{key}_pvalues.png"
            pvalue_heatmap(doc["p_values"], doc["labels"], fig_path)
            written.append(fig_path)
    return written
