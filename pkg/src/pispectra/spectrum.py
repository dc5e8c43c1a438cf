"""Closed-form and characteristic-polynomial spectra of the pi-section line.

The open-loop matrix is tridiagonal 2-Toeplitz, so its characteristic
polynomial factors through Chebyshev polynomials of the second kind::

    det(lam I - A) = (lam + R/L) P_n(g(lam))
    g(lam)  = (lam + R/L)(lam + G/C)
    P_n(y)  = U_n(LC y / 2 + 1) / (LC)**n

Every eigenvalue is tied to an angle ``theta`` by
``cos(theta) = LC g(lam) / 2 + 1``.  Closing feedback loops at the line ends
changes only the first/last rows, which keeps a closed form for the
polynomial (see :func:`char_poly`).

All polynomial work is done in the dimensionless variable
``mu = lam / omega0`` with ``omega0 = 1/sqrt(LC)``; this keeps the
coefficients O(1) for realistic line data.
"""
from __future__ import annotations

import logging
import math

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import brentq

from .line import ControlGains, SectionParams, closed_loop_model
from .modes import Mode, Spectrum, modes_from_eigenvalues
from .oracle import NumericalError, numeric_spectrum, poly_roots

__all__ = [
    "chebyshev_u",
    "char_poly",
    "char_poly_value",
    "open_loop_spectrum",
    "theta_roots_voltage",
    "approximate_theta",
    "spectrum_voltage_control",
    "dtheta_dkv",
    "spectrum_virtual_resistance",
    "spectrum_cross_current",
    "analytic_spectrum",
    "ki_sensitivity",
]

log = logging.getLogger(__name__)

MAX_POLY_SECTIONS = 25
THETA_RESIDUAL_TOL = 1e-9


def chebyshev_u(n: int, x):
    """Chebyshev polynomial of the second kind ``U_n(x)``.

    Three-term recurrence ``U_{k+1} = 2x U_k - U_{k-1}`` with ``U_0 = 1``,
    ``U_1 = 2x``; works elementwise for real or complex ``x``.
    """
    if n < 0:
        raise ValueError("degree must be >= 0")
    x = np.asarray(x)
    prev, cur = np.zeros_like(x, dtype=np.result_type(x, float)), np.ones_like(x, dtype=np.result_type(x, float))
    for _ in range(n):
        prev, cur = cur, 2 * x * cur - prev
    return cur if cur.ndim else cur[()]


def _chebyshev_table(n: int, x):
    """``U_{-2} .. U_n`` at ``x`` plus their x-derivatives.

    The ``U_{-2}`` slot is a zero placeholder that keeps ``U_k`` at index
    ``k + 2``; it is never read for ``n >= 1``.
    """
    zero = np.zeros_like(x)
    u = [zero, zero, np.ones_like(x)]  # U_-2 (unused), U_-1, U_0
    du = [zero, zero, zero]
    for _ in range(n):
        u.append(2 * x * u[-1] - u[-2])
        du.append(2 * u[-2] + 2 * x * du[-1] - du[-2])
    return u, du


# ---------------------------------------------------------------------------
# characteristic polynomial
# ---------------------------------------------------------------------------

def _scaled_params(sec: SectionParams, gains: ControlGains):
    w0 = sec.omega0
    a = sec.r_over_l / w0
    b = sec.g_over_c / w0
    ki = gains.ki_b / (sec.L * w0)
    kx = gains.kx_b / (sec.L * w0)
    return w0, a, b, ki, kx


def _char_poly_scaled(sec: SectionParams, n: int, gains: ControlGains) -> np.ndarray:
    """Ascending coefficients of ``det(mu I - A/omega0)``.

    With ``U_k = U_k(x)``, ``x = (mu + a)(mu + b)/2 + 1``::

        (mu + a + ki) [U_n - U_{n-1} + kv_a (U_{n-1} - U_{n-2})]
      + (1 + kv_b)(mu + a) [U_{n-1} + kv_a U_{n-2}]
      + kx (1 + kv_a)

    which is the Laplace expansion along the last row; the a-end gain
    enters every leading minor ``D_m`` as ``D_m + kv_a D_{m-2}``.
    """
    _, a, b, ki, kx = _scaled_params(sec, gains)
    two_x = npoly.polyadd(npoly.polymul([a, 1.0], [b, 1.0]), [2.0])
    u = [np.zeros(1), np.zeros(1), np.ones(1)]  # U_-2, U_-1, U_0
    for _ in range(n):
        u.append(npoly.polysub(npoly.polymul(two_x, u[-1]), u[-2]))
    un, un1, un2 = u[n + 2], u[n + 1], u[n]
    kva, kvb = gains.kv_a, gains.kv_b
    first = npoly.polyadd(npoly.polysub(un, un1), kva * npoly.polysub(un1, un2))
    second = npoly.polyadd(un1, kva * un2)
    p = npoly.polyadd(
        npoly.polymul([a + ki, 1.0], first),
        (1 + kvb) * npoly.polymul([a, 1.0], second),
    )
    p = npoly.polyadd(p, [kx * (1 + kva)])
    p = np.asarray(p, dtype=float)
    out = np.zeros(2 * n + 2)
    out[: len(p)] = p
    return out


def char_poly(sec: SectionParams, n: int, gains: ControlGains | None = None, scaled: bool = False) -> np.ndarray:
    """Monic characteristic polynomial of the closed-loop line, ascending.

    With ``scaled=True`` the variable is ``mu = lam / omega0``.
    """
    gains = gains or ControlGains()
    c = _char_poly_scaled(sec, n, gains)
    if scaled:
        return c
    w0 = sec.omega0
    deg = len(c) - 1
    return c * w0 ** (deg - np.arange(len(c), dtype=float))


def _eval_scaled(mu, sec: SectionParams, n: int, gains: ControlGains):
    """Value and derivative of the scaled characteristic polynomial at ``mu``,
    evaluated through the Chebyshev recurrence (not the monomial form)."""
    _, a, b, ki, kx = _scaled_params(sec, gains)
    mu = np.asarray(mu, dtype=complex)
    x = 0.5 * (mu + a) * (mu + b) + 1.0
    dx = mu + 0.5 * (a + b)
    u, du = _chebyshev_table(n, x)
    un, un1, un2 = u[n + 2], u[n + 1], u[n]
    dun, dun1, dun2 = du[n + 2], du[n + 1], du[n]
    kva, kvb = gains.kv_a, gains.kv_b
    f1 = un - un1 + kva * (un1 - un2)
    df1 = (dun - dun1 + kva * (dun1 - dun2)) * dx
    f2 = un1 + kva * un2
    df2 = (dun1 + kva * dun2) * dx
    val = (mu + a + ki) * f1 + (1 + kvb) * (mu + a) * f2 + kx * (1 + kva)
    der = f1 + (mu + a + ki) * df1 + (1 + kvb) * (f2 + (mu + a) * df2)
    return val, der


def char_poly_value(lam, sec: SectionParams, n: int, gains: ControlGains | None = None):
    """``det(lam I - A) / omega0**(2n+1)`` at ``lam`` via the Chebyshev recurrence."""
    val, _ = _eval_scaled(np.asarray(lam) / sec.omega0, sec, n, gains or ControlGains())
    return val


def _polish(mu0, sec, n, gains, iters: int = 100) -> np.ndarray:
    """Refine companion-matrix roots by Aberth-Ehrlich iteration.

    Each Newton correction is deflated by the other current root estimates,
    which keeps the estimates apart where roots cluster (near
    ``|Im mu| = 2``) and companion roots alone are too coarse for
    independent Newton steps.  Values and derivatives come from the
    Chebyshev recurrence, not the monomial coefficients.
    """
    mu = np.asarray(mu0, dtype=complex).copy()
    m = len(mu)
    active = np.ones(m, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for _ in range(iters):
            f, df = _eval_scaled(mu[active], sec, n, gains)
            ratio = f / df
            diff = mu[active][:, None] - mu[None, :]
            diff[np.arange(active.sum()), np.nonzero(active)[0]] = np.inf
            step = ratio / (1 - ratio * np.sum(1 / diff, axis=1))
            step = np.where(np.isfinite(step), step, 0)
            mu[active] -= step
            done = np.abs(step) <= 1e-14 * np.maximum(np.abs(mu[active]), 1e-300)
            idx = np.nonzero(active)[0]
            active[idx[done]] = False
            if not active.any():
                break
    return mu


def _poly_spectrum(sec: SectionParams, n: int, gains: ControlGains, max_sections: int) -> Spectrum:
    if n > max_sections:
        log.info("n=%d exceeds %d sections; using the dense eigensolver", n, max_sections)
        return numeric_spectrum(closed_loop_model(sec, n, gains))
    coeffs = _char_poly_scaled(sec, n, gains)
    mu = _polish(poly_roots(coeffs), sec, n, gains)
    lam = mu * sec.omega0
    return Spectrum(modes_from_eigenvalues(lam, sec), n, gains, "analytic")


# ---------------------------------------------------------------------------
# open loop and voltage control: eigenvalues from angles
# ---------------------------------------------------------------------------

def _pair(sec: SectionParams, one_minus_cos: float) -> tuple[complex, complex]:
    """Eigenvalue pair ``(upper, lower)`` attached to an angle, given ``1 - cos(theta)``."""
    a, b = sec.r_over_l, sec.g_over_c
    disc = 0.25 * (a - b) ** 2 - 2.0 * one_minus_cos / (sec.L * sec.C)
    mid = -0.5 * (a + b)
    if disc < 0:
        r = math.sqrt(-disc)
        return complex(mid, r), complex(mid, -r)
    r = math.sqrt(disc)
    return complex(mid + r, 0.0), complex(mid - r, 0.0)


def _one_minus_cos(theta: complex) -> float:
    # real angles and angles pi + j t are the only ones produced here
    if theta.imag == 0:
        return 2.0 * math.sin(0.5 * theta.real) ** 2
    return 1.0 + math.cosh(theta.imag)


def _spectrum_from_angles(sec, n, thetas, gains) -> Spectrum:
    modes = [Mode(0, 0j, complex(-sec.r_over_l, 0.0))]
    for k, th in enumerate(thetas, 1):
        th = complex(th)
        upper, lower = _pair(sec, _one_minus_cos(th))
        modes.append(Mode(k, th, upper))
        modes.append(Mode(-k, th, lower))
    return Spectrum(modes, n, gains, "analytic")


def open_loop_spectrum(sec: SectionParams, n: int) -> Spectrum:
    """Real mode ``-R/L`` plus ``n`` pairs at ``theta_k = k pi / (n + 1)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    thetas = [k * math.pi / (n + 1) for k in range(1, n + 1)]
    return _spectrum_from_angles(sec, n, thetas, ControlGains())


def _kv_residual(theta, kv: float, n: int):
    return np.sin((n + 1) * theta) + kv * np.sin(n * theta)


def _kv_reduced(theta: float, kv: float, n: int) -> float:
    # residual divided by sin(theta); finite and exact at theta = pi
    c2 = 2.0 * math.cos(theta)
    prev, cur = 0.0, 1.0  # U_{-1}, U_0
    for _ in range(n):
        prev, cur = cur, c2 * cur - prev
    return cur + kv * prev


def _imag_angle(kv: float, n: int) -> float:
    """``t > 0`` with ``sinh((n+1)t) = kv sinh(n t)`` (angle ``pi + j t``)."""

    def h(t):
        if t == 0:
            return math.log((n + 1) / n) - math.log(kv)
        return t + math.log(-math.expm1(-2 * (n + 1) * t)) - math.log(-math.expm1(-2 * n * t)) - math.log(kv)

    return brentq(h, 0.0, math.log(kv) + 1.0, xtol=1e-15, rtol=8.9e-16)


def theta_roots_voltage(kv: float, n: int) -> np.ndarray:
    """Angles solving ``sin((n+1) theta) + kv sin(n theta) = 0``, ascending.

    Root ``k`` is bracketed by ``(k pi/(n+1), k pi/n)`` and refined by Brent's
    method followed by one Newton step.  For ``kv > (n+1)/n`` the last root
    leaves the real interval and becomes ``pi + j t``; the result is then a
    complex array (real otherwise, as with ``numpy.linalg.eigvals``).
    """
    if not kv >= 0:
        raise ValueError(f"kv must be >= 0, got {kv}")
    if n < 1:
        raise ValueError("n must be >= 1")
    ks = np.arange(1, n + 1)
    if kv == 0:
        return ks * np.pi / (n + 1)
    roots = []
    for k in ks:
        lo = k * math.pi / (n + 1)
        hi = k * math.pi / n
        if k == n:
            crit = (n + 1) / n
            if kv > crit:
                roots.append(complex(math.pi, _imag_angle(kv, n)))
                continue
            if kv == crit:
                roots.append(math.pi)
                continue
            hi = math.pi
        flo, fhi = _kv_reduced(lo, kv, n), _kv_reduced(hi, kv, n)
        if abs(flo) <= 64 * np.finfo(float).eps * (n + 1) * (1 + kv):
            # kv so small that the root has not left the open-loop angle
            roots.append(lo)
            continue
        if not flo * fhi < 0:
            raise NumericalError(
                f"no sign change for root {k} on [{lo}, {hi}] (kv={kv}, n={n})"
            )
        t = brentq(_kv_reduced, lo, hi, args=(kv, n), xtol=1e-15, rtol=8.9e-16)
        d = (n + 1) * math.cos((n + 1) * t) + kv * n * math.cos(n * t)
        if d != 0:
            t1 = t - _kv_residual(t, kv, n) / d
            if lo <= t1 <= hi and abs(_kv_residual(t1, kv, n)) < abs(_kv_residual(t, kv, n)):
                t = t1
        roots.append(t)
    if any(isinstance(r, complex) for r in roots):
        return np.array(roots, dtype=complex)
    return np.array(roots, dtype=float)


def approximate_theta(kv: float, n: int) -> np.ndarray:
    """Empirical approximation ``k pi / (n + 1/(1 + kv))``; exact for kv in {0, 1}."""
    ks = np.arange(1, n + 1)
    return ks * np.pi / (n + 1.0 / (1.0 + kv))


def spectrum_voltage_control(sec: SectionParams, n: int, kv: float) -> Spectrum:
    """Spectrum with proportional voltage feedback ``kv`` at the b-end.

    The real mode stays at ``-R/L``; only the angles move.
    """
    thetas = theta_roots_voltage(kv, n)
    return _spectrum_from_angles(sec, n, thetas, ControlGains(kv_b=kv))


def dtheta_dkv(theta: float, kv: float, n: int) -> float:
    """Sensitivity of a root of the voltage-control angle equation to ``kv``.

    ``-sin(n t)^2 / ((n+1) cos((n+1)t) sin(n t) - n cos(n t) sin((n+1)t))``
    """
    if isinstance(theta, complex) or np.iscomplexobj(theta):
        raise ValueError("dtheta_dkv is defined for real angles only")
    theta = float(theta)
    if not 0 < theta < math.pi:
        raise ValueError(f"theta must lie in (0, pi), got {theta}")
    res = _kv_residual(theta, kv, n)
    if abs(res) > THETA_RESIDUAL_TOL:
        raise ValueError(f"(theta={theta}, kv={kv}) violates the angle equation, residual {res:.3e}")
    sn, sn1 = math.sin(n * theta), math.sin((n + 1) * theta)
    den = (n + 1) * math.cos((n + 1) * theta) * sn - n * math.cos(n * theta) * sn1
    return -sn * sn / den


# ---------------------------------------------------------------------------
# current feedback: polynomial route
# ---------------------------------------------------------------------------

def spectrum_virtual_resistance(
    sec: SectionParams, n: int, kv: float, ki: float, max_sections: int = MAX_POLY_SECTIONS
) -> Spectrum:
    """Spectrum with voltage gain ``kv`` and virtual resistance ``ki`` at the b-end."""
    return _poly_spectrum(sec, n, ControlGains(kv_b=kv, ki_b=ki), max_sections)


def spectrum_cross_current(sec: SectionParams, n: int, kx: float, max_sections: int = MAX_POLY_SECTIONS) -> Spectrum:
    """Spectrum when the b-end source also feeds back the a-end current ``i_1``."""
    return _poly_spectrum(sec, n, ControlGains(kx_b=kx), max_sections)


def analytic_spectrum(sec: SectionParams, n: int, gains: ControlGains | None = None,
                      max_sections: int = MAX_POLY_SECTIONS) -> Spectrum:
    """Pick the most explicit analytic route available for ``gains``."""
    gains = gains or ControlGains()
    if gains.is_open:
        return open_loop_spectrum(sec, n)
    if gains.kv_a == 0 and gains.ki_b == 0 and gains.kx_b == 0:
        return spectrum_voltage_control(sec, n, gains.kv_b)
    return _poly_spectrum(sec, n, gains, max_sections)


def ki_sensitivity(sec: SectionParams, n: int, k: int) -> tuple[complex, complex]:
    """First-order ``(dtheta/dki, dlam/dki)`` of complex mode ``k`` at ``ki = 0``.

    Linearizes the pair of equations::

        F1 = (lam + (R + ki)/L) sin((n+1) theta) - ki/L sin(n theta)
        F2 = cos(theta) - LC (lam + R/L)(lam + G/C)/2 - 1

    around the open-loop mode.  Negative ``k`` returns the conjugate branch.
    """
    if k == 0:
        raise ValueError("the real mode (k=0) has no angle sensitivity")
    kk = abs(int(k))
    if kk > n:
        raise ValueError(f"mode index {k} out of range for n={n}")
    a, b = sec.r_over_l, sec.g_over_c
    th = kk * math.pi / (n + 1)
    lam, _ = _pair(sec, _one_minus_cos(complex(th)))
    f1_th = (lam + a) * (n + 1) * math.cos((n + 1) * th)
    f1_lam = math.sin((n + 1) * th)
    f1_ki = (math.sin((n + 1) * th) - math.sin(n * th)) / sec.L
    f2_th = -math.sin(th)
    f2_lam = -sec.L * sec.C * (lam + 0.5 * (a + b))
    J = np.array([[f1_th, f1_lam], [f2_th, f2_lam]], dtype=complex)
    dth, dlam = np.linalg.solve(J, np.array([-f1_ki, 0.0], dtype=complex))
    dth, dlam = complex(dth), complex(dlam)
    if k < 0:
        return dth.conjugate(), dlam.conjugate()
    return dth, dlam
