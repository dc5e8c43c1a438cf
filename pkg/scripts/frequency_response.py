"""Source-to-midline frequency response (v_b -> v_3) for several controller settings."""
import argparse
from pathlib import Path

import numpy as np

from pispectra.dynamics import frequency_response
from pispectra.line import ControlGains, closed_loop_model, load_config, section_params

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "line110kv.cfg"
CASES = {
    "open": ControlGains(),
    "kv10": ControlGains(kv_b=10.0),
    "ki100": ControlGains(ki_b=100.0),
    "kv10_ki100": ControlGains(kv_b=10.0, ki_b=100.0),
}


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", type=Path, default=Path("results/frequency_response"))
    p.add_argument("--config", type=Path, default=CONFIG)
    p.add_argument("--points", type=int, default=4000)
    args = p.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    line, n, _ = load_config(args.config)
    sec = section_params(line, n)
    grid = np.geomspace(2 * np.pi * 10, 2 * np.pi * 5000, args.points)
    for name, gains in CASES.items():
        fr = frequency_response(closed_loop_model(sec, n, gains), 1, "v_3", grid)
        fr.write_csv(args.out / f"bode_{name}.csv")
        k = int(np.nanargmax(fr.magnitude))
        print(f"{name:>11}: peak |H| = {fr.magnitude[k]:8.3f} at {fr.omega[k] / (2 * np.pi):7.1f} Hz, "
              f"|H(250 Hz)| = {np.interp(2 * np.pi * 250, fr.omega, fr.magnitude):.3f}")


if __name__ == "__main__":
    main()
