"""Energize the shipped 9-bus grid from bus 1, open loop versus kV=10, kI=100."""
import argparse
from pathlib import Path

import numpy as np

from pispectra import cli


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", type=Path, default=Path("results/energize_9bus"))
    p.add_argument("--t-end", type=float, default=1.0)
    args = p.parse_args()
    for name, flags in (("open", []), ("kv10_ki100", ["--kv", "10", "--ki", "100"])):
        cli.main(["net", "--out", str(args.out / name), "--t-end", str(args.t_end), *flags])
        cur = np.loadtxt(args.out / name / "branch_currents.csv", delimiter=",", skiprows=1)
        print(f"{name:>11}: peak current in branch 1-4 = {np.max(np.abs(cur[:, 1])):.4f}")


if __name__ == "__main__":
    main()
