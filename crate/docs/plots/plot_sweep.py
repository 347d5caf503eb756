"""Plot a `ptg sweep-pt-line` CSV: closed-form and measured discords
against gamma/g.

    python plot_sweep.py sweep.csv -o sweep.png
"""
import argparse
import csv
import math

import matplotlib.pyplot as plt


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("csv")
    ap.add_argument("-o", "--output")
    args = ap.parse_args()

    with open(args.csv, newline="") as f:
        rows = list(csv.DictReader(f))
    x = [float(r["gamma_over_g"]) for r in rows]

    fig, ax = plt.subplots(figsize=(6, 4))
    for d, color in (("D_LG", "C0"), ("D_GL", "C1")):
        ax.plot(x, [float(r[d + "_formula"]) for r in rows], color=color, label=d + " formula")
        ax.plot(x, [float(r[d + "_measured"]) for r in rows], "o", color=color, mfc="none",
                label=d + " measured")
    ax.axhline(math.log(2), color="grey", ls=":", lw=1)
    ax.axvline(1.0, color="grey", ls="--", lw=1)
    ax.set_xlabel("gamma / g")
    ax.set_ylabel("discord")
    ax.legend(fontsize="small")
    fig.tight_layout()
    if args.output:
        fig.savefig(args.output, dpi=150)
    else:
        plt.show()


if __name__ == "__main__":
    main()
