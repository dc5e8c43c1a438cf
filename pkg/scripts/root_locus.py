"""Root loci of the 110 kV example line over the voltage gain and the virtual resistance.

Writes ``locus_kv.csv`` and ``locus_ki.csv`` (gain, k, re_lambda, im_lambda).
"""
import argparse
from pathlib import Path

from pispectra import cli

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "line110kv.cfg"


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", type=Path, default=Path("results/root_locus"))
    p.add_argument("--config", type=Path, default=CONFIG)
    args = p.parse_args()
    sweeps = {
        "kv": ["--min", "0", "--max", "100", "--points", "201"],
        "ki": ["--min", "0", "--max", "200", "--points", "201"],
    }
    for gain, flags in sweeps.items():
        out = args.out / gain
        cli.main(["locus", "--config", str(args.config), "--out", str(out), "--gain", gain, *flags])
        (out / "locus.csv").rename(args.out / f"locus_{gain}.csv")
        out.rmdir()


if __name__ == "__main__":
    main()
