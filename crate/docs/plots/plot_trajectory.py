"""Plot the columns of one or more `ptg trajectory` CSV files against t.

    python plot_trajectory.py up.csv bp.csv --columns I D_LG D_GL --logy -o traj.png
"""
import argparse
import csv

import matplotlib.pyplot as plt


def read(path):
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    return {k: [float(r[k]) for r in rows] for k in rows[0]}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("csv", nargs="+")
    ap.add_argument("--columns", nargs="+", default=["I", "D_LG", "D_GL"])
    ap.add_argument("--logx", action="store_true")
    ap.add_argument("--logy", action="store_true")
    ap.add_argument("-o", "--output")
    args = ap.parse_args()

    fig, axes = plt.subplots(len(args.columns), 1, sharex=True, squeeze=False,
                             figsize=(6, 2.4 * len(args.columns)))
    for path in args.csv:
        data = read(path)
        for ax, col in zip(axes[:, 0], args.columns):
            ax.plot(data["t"], data[col], label=path)
            ax.set_ylabel(col)
    for ax in axes[:, 0]:
        if args.logx:
            ax.set_xscale("log")
        if args.logy:
            ax.set_yscale("log")
    axes[-1, 0].set_xlabel("t")
    axes[0, 0].legend(fontsize="small")
    fig.tight_layout()
    if args.output:
        fig.savefig(args.output, dpi=150)
    else:
        plt.show()


if __name__ == "__main__":
    main()
