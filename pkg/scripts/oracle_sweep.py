"""Worst analytic-versus-eigensolver error per section count over random line data."""
import argparse

import numpy as np

from pispectra.line import ControlGains, SectionParams, closed_loop_model
from pispectra.oracle import compare, numeric_spectrum
from pispectra.spectrum import analytic_spectrum


def random_section(rng):
    L = 10 ** rng.uniform(-3, -1)
    w0 = 10 ** rng.uniform(3, 5)
    C = 1 / (w0 ** 2 * L)
    return SectionParams(rng.uniform(1, 100) * L, L, C, rng.uniform(0, 10) * C)


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--max-n", type=int, default=30)
    p.add_argument("--sets", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    rng = np.random.default_rng(args.seed)
    print(" n  open      kV        kI        kX        kV+kI")
    for n in range(1, args.max_n + 1):
        worst = dict.fromkeys(["open", "kV", "kI", "kX", "kV+kI"], 0.0)
        for _ in range(args.sets):
            sec = random_section(rng)
            z0 = np.sqrt(sec.L / sec.C)
            kv, ki, kx = rng.uniform(0.1, 20), rng.uniform(0.01, 5) * z0, rng.uniform(0.01, 5) * z0
            for name, g in (("open", ControlGains()), ("kV", ControlGains(kv_b=kv)), ("kI", ControlGains(ki_b=ki)),
                            ("kX", ControlGains(kx_b=kx)), ("kV+kI", ControlGains(kv_b=kv, ki_b=ki))):
                err = compare(analytic_spectrum(sec, n, g), numeric_spectrum(closed_loop_model(sec, n, g))).max_rel_error
                worst[name] = max(worst[name], err)
        print(f"{n:2d}  " + "  ".join(f"{v:.1e}" for v in worst.values()))


if __name__ == "__main__":
    main()
