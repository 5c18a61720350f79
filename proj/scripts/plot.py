"""Plot the CSVs written by `ddcl run`.

    python3 scripts/plot.py runs/debris            # writes runs/debris/*.png
"""
import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402


def plot_epoch_log(log: pd.DataFrame, out: Path, group: str | None) -> None:
    panels = [("L_q", "L_soft", "V_soft"), ("S_P",), ("H_Q",), ("acc", "nmi", "ari"), ("T",)]
    fig, axes = plt.subplots(len(panels), 1, figsize=(7, 2.2 * len(panels)), sharex=True)
    groups = log.groupby(group) if group else [(None, log)]
    for key, part in groups:
        for ax, cols in zip(axes, panels):
            for c in cols:
                label = c if key is None else f"{c} ({group}={key})"
                ax.plot(part["epoch"], part[c], label=label)
            if cols == ("S_P",):
                ax.set_yscale("log")
    for ax in axes:
        ax.legend(fontsize=7)
    axes[-1].set_xlabel("epoch")
    fig.tight_layout()
    fig.savefig(out / "epoch_log.png", dpi=120)


def plot_ablation(table: pd.DataFrame, out: Path) -> None:
    fig, (a, b) = plt.subplots(1, 2, figsize=(9, 3.2))
    a.semilogx(table["epsilon"], table["best_acc"], "o-")
    a.set_xlabel("epsilon")
    a.set_ylabel("best ACC")
    b.loglog(table["epsilon"], table["final_S_P"] / table["initial_S_P"], "o-")
    b.set_xlabel("epsilon")
    b.set_ylabel("final S(P) / initial S(P)")
    fig.tight_layout()
    fig.savefig(out / "ablation.png", dpi=120)


def plot_level2(vectors: pd.DataFrame, out: Path) -> None:
    first = vectors[vectors["setting"] == vectors["setting"].min()]
    z = first.filter(like="z").to_numpy()
    z = z - z.mean(axis=0)
    _, _, vt = np.linalg.svd(z, full_matrices=False)
    xy = z @ vt[:2].T
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.scatter(xy[:, 0], xy[:, 1], c=first["topic"], cmap="tab20", s=8)
    ax.set_title("level-2 document vectors (first two principal axes)")
    fig.tight_layout()
    fig.savefig(out / "level2_vectors.png", dpi=120)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("run_dir", type=Path)
    args = ap.parse_args()
    d = args.run_dir
    log = pd.read_csv(d / "epoch_log.csv")
    group = next((c for c in ("epsilon", "K") if c in log.columns), None)
    plot_epoch_log(log, d, group)
    if (d / "ablation.csv").exists():
        plot_ablation(pd.read_csv(d / "ablation.csv"), d)
    if (d / "level2_vectors.csv").exists():
        plot_level2(pd.read_csv(d / "level2_vectors.csv"), d)


if __name__ == "__main__":
    main()
