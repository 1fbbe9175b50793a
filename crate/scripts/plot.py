"""Plot edgesplit CSV outputs.

    python scripts/plot.py curve out/f1/curve.csv curve.png
    python scripts/plot.py sweep out/f1/sweep_w2.csv sweep.png
"""
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def plot_curve(path, out):
    df = pd.read_csv(path)
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    axes[0].plot(df["episode"], df["mean_reward"], alpha=0.3, label="episode")
    axes[0].plot(df["episode"], df["mean_reward"].rolling(100, min_periods=1).mean(), label="100-episode mean")
    axes[0].set_xlabel("episode")
    axes[0].set_ylabel("mean slot reward")
    axes[0].legend()
    axes[1].plot(df["episode"], df["entropy"])
    axes[1].set_xlabel("episode")
    axes[1].set_ylabel("policy entropy")
    fig.tight_layout()
    fig.savefig(out)


def plot_sweep(path, out):
    df = pd.read_csv(path, comment="#")
    metrics = ["mean_reward", "mean_latency_s", "mean_energy_j", "mean_accuracy"]
    fig, axes = plt.subplots(1, len(metrics), figsize=(4 * len(metrics), 3.5))
    for ax, m in zip(axes, metrics):
        ax.plot(df["grid_value"], df[m], marker="o")
        ax.set_xlabel("swept weight")
        ax.set_ylabel(m)
    fig.tight_layout()
    fig.savefig(out)


if __name__ == "__main__":
    kind, src, dst = sys.argv[1:4]
    {"curve": plot_curve, "sweep": plot_sweep}[kind](src, dst)
