"""Plot a `ptg phase-diagram` CSV as two panels: region labels, and the
long-time discord with the information form marked per point.

    python plot_phase_diagram.py grid.csv -o grid.png
"""
import argparse
import csv

import matplotlib.pyplot as plt
import numpy as np

REGIONS = ["I", "II", "III", "IV", "V", "boundary"]
MARKERS = {"constant": "s", "power_law": "v", "log": "^", "linear": "o"}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("csv")
    ap.add_argument("-o", "--output")
    args = ap.parse_args()

    with open(args.csv, newline="") as f:
        rows = list(csv.DictReader(f))
    gl = np.array([float(r["gamma_L"]) for r in rows])
    gg = np.array([float(r["gamma_G"]) for r in rows])
    region = np.array([REGIONS.index(r["region"]) if r["region"] in REGIONS else -1 for r in rows])
    d = np.array([float(r["D_longtime_value"]) if r["D_longtime_value"] != "NaN" else np.nan
                  for r in rows])
    form = [r["I_longtime_form"] for r in rows]

    fig, (a0, a1) = plt.subplots(1, 2, figsize=(11, 4.5))
    sc = a0.scatter(gl, gg, c=region, cmap="tab10", vmin=0, vmax=9, s=12, marker="s")
    handles = [plt.Line2D([], [], ls="", marker="s", color=sc.cmap(sc.norm(i)), label=name)
               for i, name in enumerate(REGIONS)]
    a0.legend(handles=handles, title="region", fontsize="small")
    a0.set_title("regions")

    for f, m in MARKERS.items():
        sel = np.array([x == f for x in form])
        if sel.any():
            s = a1.scatter(gl[sel], gg[sel], c=d[sel], marker=m, s=14, cmap="viridis",
                           vmin=np.nanmin(d), vmax=np.nanmax(d), label=f"I ~ {f}")
    fig.colorbar(s, ax=a1, label="D_LG at horizon")
    a1.legend(fontsize="small")
    a1.set_title("long-time correlations")

    for ax in (a0, a1):
        lim = [0, max(gl.max(), gg.max())]
        ax.plot(lim, lim, color="grey", lw=0.8)
        ax.set_xlabel("gamma_L / g")
        ax.set_ylabel("gamma_G / g")
    fig.tight_layout()
    if args.output:
        fig.savefig(args.output, dpi=150)
    else:
        plt.show()


if __name__ == "__main__":
    main()
