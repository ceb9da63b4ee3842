"""Figure rendering for the report paths. Every figure goes to a file next
to the delimited output; nothing is shown interactively."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .towers import Tower  # noqa: E402

_SAVE_KW = {"dpi": 150, "metadata": {"Software": None}}


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def _log2_index(level, base: int) -> float:
    from .towers import SymbolicRank

    idx = level.index
    if isinstance(idx, SymbolicRank):
        return idx.exponent * math.log2(idx.base) + math.log2(abs(idx.coeff))
    return math.log2(idx) if idx > 0 else 0.0


def save_index_growth(towers: list[Tower], path) -> None:
    """log2 of the level indices per tower; symbolic indices plot exactly."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for tower in towers:
        xs = list(range(1, len(tower.levels) + 1))
        ys = [_log2_index(lv, tower.rank_base) for lv in tower.levels]
        ax.plot(xs, ys, marker="o", label=tower.label)
    ax.set_xlabel("level")
    ax.set_ylabel("log2(index)")
    ax.set_title("index growth along the filtration")
    ax.legend(fontsize=8)
    _finish(fig, path)


def save_invariant_sequences(gradient, betti_ratios, label: str, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = list(range(1, len(gradient) + 1))
    ax.plot(xs, [float(v) for v in gradient], marker="o", label="(rank-1)/index")
    if betti_ratios is not None:
        ax.plot(
            list(range(1, len(betti_ratios) + 1)),
            [float(v) for v in betti_ratios],
            marker="s",
            label="b1/index",
        )
    ax.set_xlabel("level")
    ax.set_ylabel("exact ratio (plotted as float)")
    ax.set_title(label)
    ax.legend(fontsize=8)
    _finish(fig, path)


def save_oracle_classes(report, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    sizes = report.class_sizes
    ax.bar(range(len(sizes)), sizes)
    ax.set_xlabel("loop class")
    ax.set_ylabel("states")
    ax.set_title(
        f"loop classes at scale {report.scale}, length <= {report.max_len} "
        f"({report.n_states} states)"
    )
    _finish(fig, path)


def save_detect_window(report, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 3))
    n = report.certificate.value
    k = report.k
    rs = list(range(1, max(4, (n // 4) + 2)))
    ax.axhspan(2 * k, n, color="tab:green", alpha=0.15, label="2k <= 4r < n")
    ax.plot(rs, [4 * r for r in rs], marker="o", label="4r")
    for r in report.window:
        ax.axvline(r, color="tab:green", linestyle=":")
    ax.axhline(2 * k, color="tab:orange", linestyle="--", label=f"2k = {2 * k}")
    ax.axhline(n, color="tab:red", linestyle="--", label=f"systole = {n}")
    ax.set_xlabel("scale r")
    ax.legend(fontsize=7)
    ax.set_title("detection window")
    _finish(fig, path)


def save_paper_rows(rows, section: str, path) -> None:
    """One horizontal bar per check, green for PASS, red for FAIL."""
    fig, ax = plt.subplots(figsize=(7, 0.4 * max(4, len(rows)) + 1))
    labels = [row.label for row in rows]
    colors = ["tab:green" if row.passed else "tab:red" for row in rows]
    ax.barh(range(len(rows)), [1] * len(rows), color=colors)
    ax.set_yticks(range(len(rows)))
    ax.set_yticklabels(labels, fontsize=7)
    ax.set_xticks([])
    ax.invert_yaxis()
    ax.set_title(f"reproduction checks, section {section}")
    _finish(fig, path)
