"""Plot the CSVs written by `irtr-lab` into PNGs next to them.

usage: python scripts/plot_figures.py OUT_DIR
"""

import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def load(path):
    return pd.read_csv(path, comment="#")


def frontier(ax, path):
    if path.exists():
        f = load(path)
        if len(f):
            ax.plot(f["delta1"], f["delta2"], "r-", label="IRTR frontier")


def main(out):
    out = Path(out)
    if (out / "fig1.csv").exists():
        d = load(out / "fig1.csv")
        fig, ax = plt.subplots()
        ax.plot(d["theta2_over_sigma"], d["c_tilde_closed_form"])
        ax.set(xlabel=r"$\theta_2/\sigma$", ylabel=r"$\tilde c$")
        fig.savefig(out / "fig1.png", dpi=150)
    if (out / "fig2.csv").exists():
        d = load(out / "fig2.csv")
        fig, ax = plt.subplots()
        ax.plot(d["theta2_over_sigma"], d["delta1"], label=r"$\Delta_1$")
        ax.plot(d["theta2_over_sigma"], d["delta2"], label=r"$\Delta_2$")
        ax.set(xlabel=r"$\theta_2/\sigma$")
        ax.legend()
        fig.savefig(out / "fig2.png", dpi=150)
    if (out / "fig3_points.csv").exists():
        p = load(out / "fig3_points.csv")
        fig, axes = plt.subplots(2, (len(p) + 1) // 2, figsize=(12, 6), squeeze=False)
        for ax, (_, row) in zip(axes.flat, p.iterrows()):
            frontier(ax, out / f"fig3_panel{int(row['panel'])}_frontier.csv")
            ax.plot(row["delta1"], row["delta2"], "ko")
            ax.set(xlim=(0, 1), ylim=(0, 1), title=rf"$\theta_2={row['theta2_over_sigma']:g}\sigma$")
        fig.tight_layout()
        fig.savefig(out / "fig3.png", dpi=150)
    if (out / "fig4.csv").exists():
        d = load(out / "fig4.csv")
        fig, ax = plt.subplots()
        frontier(ax, out / "fig4_frontier.csv")
        ax.scatter(d["delta1"], d["delta2"], c=d["theta1_over_sigma"], s=8)
        ax.set(xlabel=r"$\Delta_1$", ylabel=r"$\Delta_2$", xlim=(0, 1), ylim=(0, 1))
        fig.savefig(out / "fig4.png", dpi=150)
    if (out / "fig5_samples.csv").exists():
        d = load(out / "fig5_samples.csv")
        fig, ax = plt.subplots()
        frontier(ax, out / "fig5_frontier.csv")
        ax.plot(d["delta1"], d["delta2"], ".", ms=1)
        ax.set(xlabel=r"$\Delta_1$", ylabel=r"$\Delta_2$", xlim=(0, 1), ylim=(0, 1))
        fig.savefig(out / "fig5.png", dpi=150)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "irtr-out")
