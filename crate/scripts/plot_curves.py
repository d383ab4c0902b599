#!/usr/bin/env python3
"""Plot one or more `positronium scan` CSV files (header `r,V`).

    positronium scan --model coulomb --rmin 1 --rmax 1e4 > coulomb.csv
    positronium scan --model ring-ml --rmin 1e-7 --rmax 1e-3 > ml.csv
    python3 scripts/plot_curves.py coulomb.csv ml.csv -o curves.png
"""

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("csv", nargs="+", type=Path)
    ap.add_argument("-o", "--output", type=Path, default=Path("curves.png"))
    ap.add_argument("--linear-r", action="store_true", help="linear r axis (default log)")
    ap.add_argument("--ymin", type=float)
    ap.add_argument("--ymax", type=float)
    args = ap.parse_args()

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for path in args.csv:
        data = np.genfromtxt(path, delimiter=",", names=True)
        ax.plot(data["r"], data["V"], label=path.stem)

    if not args.linear_r:
        ax.set_xscale("log")
    ax.set_ylim(args.ymin, args.ymax)
    ax.axhline(2.0, color="grey", lw=0.6, ls=":")
    ax.set_xlabel(r"$r\ [\hbar/mc]$")
    ax.set_ylabel(r"$V(r)\ [mc^2]$")
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
