"""PNG figures written next to the CSV artifacts."""
from __future__ import annotations

from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_front(fitness, path) -> None:
    """Pairwise scatter of defender payoffs, one panel per attacker pair (parallel coordinates beyond 4)."""
    F = np.atleast_2d(np.asarray(fitness, dtype=float))
    n = F.shape[1]
    if n == 1 or n > 4:
        fig, ax = plt.subplots(figsize=(6, 4))
        for row in F:
            ax.plot(np.arange(1, n + 1), row, color="tab:blue", alpha=0.4, lw=0.8, marker="o" if n == 1 else None)
        ax.set_xticks(np.arange(1, n + 1))
        ax.set_xlabel("attacker")
        ax.set_ylabel("defender payoff")
    else:
        pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
        fig, axes = plt.subplots(1, len(pairs), figsize=(4 * len(pairs), 4), squeeze=False)
        for ax, (a, b) in zip(axes[0], pairs):
            ax.scatter(F[:, a], F[:, b], s=12)
            ax.set_xlabel(f"f{a + 1}")
            ax.set_ylabel(f"f{b + 1}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_ablation(rows, path) -> None:
    """Mean HV per variant with one-standard-deviation error bars."""
    hv = defaultdict(list)
    for r in rows:
        hv[r.config].append(r.hv)
    keys = sorted(hv)
    means = [np.mean(hv[k]) for k in keys]
    errs = [np.std(hv[k]) for k in keys]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar([str(k) for k in keys], means, yerr=errs, capsize=4, color="tab:gray")
    ax.set_xlabel("variant")
    ax.set_ylabel("hypervolume")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_scaling(rows, path) -> None:
    """Runtime against targets (one line per attacker count) and against attackers (per target count)."""
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    for ax, (key, x_of, label) in zip(axes, (("n", lambda r: r.t, "targets"), ("t", lambda r: r.n, "attackers"))):
        groups = defaultdict(list)
        for r in rows:
            groups[getattr(r, key)].append(r)
        for g, members in sorted(groups.items()):
            if len(members) < 2:
                continue
            members.sort(key=x_of)
            ax.plot([x_of(r) for r in members], [r.runtime_ms / 1000 for r in members], marker="o",
                    label=f"{key}={g}")
        ax.set_xlabel(label)
        ax.set_ylabel("runtime (s)")
        if ax.get_legend_handles_labels()[0]:
            ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
