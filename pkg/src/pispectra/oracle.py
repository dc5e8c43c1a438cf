"""Numerical ground truth: dense eigensolver, companion-matrix roots, pairing."""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .line import StateSpaceModel
from .modes import Spectrum, modes_from_eigenvalues

__all__ = ["NumericalError", "OracleReport", "numeric_spectrum", "eigenvalues", "poly_roots", "compare"]

REL_ERROR_FLOOR = 1e-6  # rad/s


class NumericalError(ArithmeticError):
    """An eigen- or root-solver failed to produce finite results."""


def eigenvalues(A) -> np.ndarray:
    A = np.asarray(A)
    if not np.iscomplexobj(A):
        A = A.astype(float)
    try:
        ev = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver did not converge: {exc}") from exc
    if not np.all(np.isfinite(ev)):
        raise NumericalError("eigensolver returned non-finite eigenvalues")
    return ev.astype(complex)


def numeric_spectrum(model: StateSpaceModel) -> Spectrum:
    """All eigenvalues of ``model.A`` from LAPACK's nonsymmetric QR algorithm."""
    if model.dim < 1:
        raise ValueError("empty model")
    ev = eigenvalues(model.A)
    return Spectrum(modes_from_eigenvalues(ev, model.section), model.n_sections, model.gains, "oracle")


def companion(coeffs) -> np.ndarray:
    c = np.asarray(coeffs, dtype=complex)
    deg = len(c) - 1
    M = np.zeros((deg, deg), dtype=complex)
    M[1:, :-1] = np.eye(deg - 1)
    M[:, -1] = -c[:-1] / c[-1]
    return M.real.copy() if np.all(c.imag == 0) else M


def poly_roots(coeffs) -> np.ndarray:
    """Roots of ``sum(coeffs[i] x**i)`` (ascending order) with multiplicity."""
    c = np.atleast_1d(np.asarray(coeffs))
    if c.ndim != 1 or len(c) < 2:
        raise ValueError("polynomial degree must be >= 1")
    if c[-1] == 0:
        raise ValueError("leading coefficient is zero")
    if not np.all(np.isfinite(c)):
        raise ValueError("non-finite polynomial coefficient")
    if len(c) == 2:
        return np.array([-complex(c[0]) / complex(c[1])])
    return eigenvalues(companion(c))


@dataclass(frozen=True)
class OracleReport:
    analytic: Spectrum
    numeric: Spectrum
    max_rel_error: float
    matching: tuple  # (analytic index, numeric index) pairs

    def to_dict(self) -> dict:
        return {
            "max_rel_error": self.max_rel_error,
            "matching": [list(p) for p in self.matching],
            "analytic": self.analytic.to_dict(),
            "numeric": self.numeric.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "OracleReport":
        return cls(
            Spectrum.from_dict(d["analytic"]),
            Spectrum.from_dict(d["numeric"]),
            float(d["max_rel_error"]),
            tuple(tuple(p) for p in d["matching"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def match_eigenvalues(a, b):
    """Optimal assignment between two equal-size eigenvalue sets.

    Returns index arrays ``(i, j)`` minimising ``sum |a[i] - b[j]|``.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if len(a) != len(b):
        raise ValueError(f"cardinality mismatch: {len(a)} vs {len(b)} eigenvalues")
    return linear_sum_assignment(np.abs(a[:, None] - b[None, :]))


def max_relative_error(a, b, floor: float = REL_ERROR_FLOOR) -> float:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    i, j = match_eigenvalues(a, b)
    if len(i) == 0:
        return 0.0
    return float(np.max(np.abs(a[i] - b[j]) / np.maximum(np.abs(b[j]), floor)))


def compare(analytic: Spectrum, numeric: Spectrum) -> OracleReport:
    la, ln = analytic.eigenvalues, numeric.eigenvalues
    i, j = match_eigenvalues(la, ln)
    err = np.abs(la[i] - ln[j]) / np.maximum(np.abs(ln[j]), REL_ERROR_FLOOR)
    return OracleReport(
        analytic,
        numeric,
        float(err.max()) if len(err) else 0.0,
        tuple((int(p), int(q)) for p, q in zip(i, j)),
    )
