"""Eigenvalue containers shared by the analytic and numeric spectrum code."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .line import ControlGains, SectionParams

__all__ = ["Mode", "Spectrum", "modes_from_eigenvalues", "theta_of", "conjugate_symmetrize"]


@dataclass(frozen=True)
class Mode:
    """One eigenvalue with its mode index and Chebyshev angle.

    ``k == 0`` marks a real mode, ``+k``/``-k`` the upper/lower member of
    the k-th complex pair.  ``theta`` is complex in general (``nan`` when
    unknown, e.g. for eigenvalues of arbitrary network matrices).
    """

    k: int
    theta: complex
    lam: complex

    @property
    def damping_ratio(self) -> float:
        mag = abs(self.lam)
        if mag == 0:
            return math.nan
        return -self.lam.real / mag


@dataclass(frozen=True)
class Spectrum:
    modes: tuple
    n_sections: int | None = None
    gains: ControlGains = field(default_factory=ControlGains)
    method: str = "analytic"

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if self.method not in ("analytic", "oracle"):
            raise ValueError(f"unknown method tag {self.method!r}")

    def __len__(self):
        return len(self.modes)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([m.lam for m in self.modes], dtype=complex)

    @property
    def thetas(self) -> np.ndarray:
        return np.array([m.theta for m in self.modes], dtype=complex)

    def complex_modes(self, upper: bool = True) -> list:
        """Members of complex pairs, ``k > 0`` (or ``k < 0``), sorted by ``|k|``."""
        sel = [m for m in self.modes if (m.k > 0 if upper else m.k < 0)]
        return sorted(sel, key=lambda m: abs(m.k))

    def real_modes(self) -> list:
        return [m for m in self.modes if m.k == 0]

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "n_sections": self.n_sections,
            "gains": self.gains.as_dict(),
            "method": self.method,
            "modes": [
                {
                    "k": m.k,
                    "theta": [_jnum(m.theta.real), _jnum(m.theta.imag)],
                    "lambda": [_jnum(m.lam.real), _jnum(m.lam.imag)],
                    "damping_ratio": _jnum(m.damping_ratio),
                }
                for m in self.modes
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Spectrum":
        modes = [
            Mode(
                k=int(m["k"]),
                theta=complex(_fnum(m["theta"][0]), _fnum(m["theta"][1])),
                lam=complex(_fnum(m["lambda"][0]), _fnum(m["lambda"][1])),
            )
            for m in d["modes"]
        ]
        return cls(modes, d.get("n_sections"), ControlGains(**d.get("gains", {})), d["method"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    CSV_COLUMNS = ("k", "re_lambda", "im_lambda", "theta_re", "theta_im", "damping_ratio")

    def rows(self) -> list:
        return [
            (m.k, m.lam.real, m.lam.imag, m.theta.real, m.theta.imag, m.damping_ratio)
            for m in self.modes
        ]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.CSV_COLUMNS)
            for row in self.rows():
                w.writerow([row[0]] + [repr(float(x)) for x in row[1:]])


def _jnum(x: float):
    return None if math.isnan(x) else float(x)


def _fnum(x) -> float:
    return math.nan if x is None else float(x)


def theta_of(lam, sec: SectionParams) -> np.ndarray:
    """Angle with ``cos(theta) = LC (lam + R/L)(lam + G/C)/2 + 1``.

    Principal branch, so ``Re(theta)`` lies in ``[0, pi]``.
    """
    lam = np.asarray(lam, dtype=complex)
    x = 0.5 * sec.L * sec.C * (lam + sec.r_over_l) * (lam + sec.g_over_c) + 1.0
    return np.arccos(x)


def conjugate_symmetrize(values, rtol: float = 1e-8) -> np.ndarray:
    """Make a root set of a real polynomial exactly closed under conjugation.

    Near-real values are snapped to the real axis; the rest are paired
    upper/lower by optimal assignment and replaced by the pair average.
    """
    z = np.asarray(values, dtype=complex).copy()
    scale = np.maximum(np.abs(z), 1e-300)
    real = np.abs(z.imag) <= rtol * scale
    z[real] = z[real].real
    up = np.flatnonzero(~real & (z.imag > 0))
    lo = np.flatnonzero(~real & (z.imag < 0))
    if len(up) != len(lo):
        # unbalanced: a pair straddles the snapping threshold; leave as is
        return z
    if len(up):
        cost = np.abs(z[up][:, None] - np.conj(z[lo])[None, :])
        i, j = linear_sum_assignment(cost)
        avg = 0.5 * (z[up[i]] + np.conj(z[lo[j]]))
        z[up[i]] = avg
        z[lo[j]] = np.conj(avg)
    return z


def modes_from_eigenvalues(values, sec: SectionParams | None = None, rtol: float = 1e-8) -> list:
    """Index a conjugate-closed eigenvalue set as modes.

    Real eigenvalues get ``k = 0`` (sorted by decreasing real part), complex
    pairs get ``k = +-1, +-2, ...`` by ascending ``|Im|``.
    """
    z = conjugate_symmetrize(values, rtol)
    th = theta_of(z, sec) if sec is not None else np.full(len(z), complex(np.nan, np.nan))
    real = [i for i in range(len(z)) if z[i].imag == 0]
    upper = sorted((i for i in range(len(z)) if z[i].imag > 0), key=lambda i: (z[i].imag, z[i].real))
    lower = sorted((i for i in range(len(z)) if z[i].imag < 0), key=lambda i: (-z[i].imag, z[i].real))
    modes = [Mode(0, complex(th[i]), complex(z[i])) for i in sorted(real, key=lambda i: -z[i].real)]
    for k, (iu, il) in enumerate(zip(upper, lower), 1):
        modes.append(Mode(k, complex(th[iu]), complex(z[iu])))
        modes.append(Mode(-k, complex(th[il]), complex(z[il])))
    # leftovers only when symmetrization could not pair everything
    for i in upper[len(lower):] + lower[len(upper):]:
        modes.append(Mode(0, complex(th[i]), complex(z[i])))
    return modes
