"""Frequency response and exact zero-order-hold simulation of LTI line models."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.linalg import expm

from .line import StateSpaceModel
from .oracle import eigenvalues

__all__ = [
    "Tone",
    "Ramp",
    "SignalSpec",
    "SimResult",
    "FreqResponse",
    "frequency_response",
    "sampling_bound",
    "zoh_discretize",
    "simulate",
    "harmonic_amplitude",
    "thd",
    "steady_state_window",
]

SAMPLES_PER_PERIOD = 20


@dataclass(frozen=True)
class Tone:
    amplitude: float
    frequency: float  # Hz
    phase: float = 0.0  # rad

    def __post_init__(self):
        if self.frequency < 0:
            raise ValueError("frequency must be >= 0")


@dataclass(frozen=True)
class Ramp:
    """Envelope rising linearly from 0 at ``t_start`` to 1 at ``t_start + t_ramp``."""

    t_start: float
    t_ramp: float

    def __post_init__(self):
        if not self.t_ramp > 0:
            raise ValueError("ramp duration must be > 0")

    def __call__(self, t):
        return np.clip((np.asarray(t, dtype=float) - self.t_start) / self.t_ramp, 0.0, 1.0)


@dataclass(frozen=True)
class SignalSpec:
    """Sum of sinusoids ``A sin(2 pi f t + phase)`` times an optional ramp."""

    components: tuple = ()
    ramp: Ramp | None = None

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    @classmethod
    def sine(cls, amplitude: float, frequency: float, harmonics=(), ramp: Ramp | None = None):
        """Fundamental plus ``(frequency, amplitude)`` extra tones."""
        comps = [Tone(amplitude, frequency)] + [Tone(a, f) for f, a in harmonics]
        return cls(tuple(comps), ramp)

    def scaled(self, factor: float) -> "SignalSpec":
        return SignalSpec(tuple(Tone(c.amplitude * factor, c.frequency, c.phase) for c in self.components), self.ramp)

    @property
    def max_frequency(self) -> float:
        return max((c.frequency for c in self.components), default=0.0)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for c in self.components:
            out = out + c.amplitude * np.sin(2 * np.pi * c.frequency * t + c.phase)
        if self.ramp is not None:
            out = out * self.ramp(t)
        return out

    def to_dict(self) -> dict:
        d = {"components": [{"amplitude": c.amplitude, "frequency": c.frequency, "phase": c.phase} for c in self.components]}
        if self.ramp is not None:
            d["ramp"] = {"t_start": self.ramp.t_start, "t_ramp": self.ramp.t_ramp}
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "SignalSpec":
        comps = tuple(Tone(float(c["amplitude"]), float(c["frequency"]), float(c.get("phase", 0.0)))
                      for c in d.get("components", ()))
        r = d.get("ramp")
        return cls(comps, Ramp(float(r["t_start"]), float(r["t_ramp"])) if r else None)


def _write_table(path, header, columns) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([repr(float(x)) for x in row])


@dataclass(frozen=True, eq=False)
class SimResult:
    t: np.ndarray
    x: np.ndarray  # (steps, dim)
    u: np.ndarray  # (steps, inputs)
    dt: float
    state_labels: tuple = ()
    input_labels: tuple = ()

    def state(self, label: str) -> np.ndarray:
        try:
            return self.x[:, self.state_labels.index(label)]
        except ValueError:
            raise KeyError(f"unknown state {label!r}") from None

    def write_csv(self, path, labels: Sequence[str] | None = None) -> None:
        labels = list(labels) if labels is not None else list(self.state_labels)
        _write_table(path, ["t"] + labels, [self.t] + [self.state(lab) for lab in labels])


@dataclass(frozen=True, eq=False)
class FreqResponse:
    omega: np.ndarray  # rad/s
    H: np.ndarray  # complex gain per grid point, nan where singular
    input_label: str = ""
    output_label: str = ""
    singular: np.ndarray = field(default=None)

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.H)

    @property
    def magnitude_db(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 20 * np.log10(np.abs(self.H))

    @property
    def phase(self) -> np.ndarray:
        return np.angle(self.H)

    def write_csv(self, path) -> None:
        _write_table(path, ["omega", "magnitude", "magnitude_db", "phase"],
                     [self.omega, self.magnitude, self.magnitude_db, self.phase])


def frequency_response(model: StateSpaceModel, input, output_state: str, grid) -> FreqResponse:
    """``H(jw) = e_out^T (jw I - A)^-1 B e_in``, one linear solve per frequency."""
    w = np.asarray(grid, dtype=float)
    if w.ndim != 1 or len(w) == 0:
        raise ValueError("frequency grid must be a non-empty 1-d sequence")
    i_in = model.input_index(input)
    i_out = model.state_index(output_state)
    A = model.A
    b = model.B[:, i_in].astype(complex)
    eye = np.eye(model.dim)
    H = np.empty(len(w), dtype=complex)
    singular = np.zeros(len(w), dtype=bool)
    for p, wp in enumerate(w):
        M = 1j * wp * eye - A
        try:
            sol = np.linalg.solve(M, b)
        except np.linalg.LinAlgError:
            singular[p] = True
            H[p] = complex(np.nan, np.nan)
            continue
        if np.linalg.cond(M) > 1e15:
            singular[p] = True
            H[p] = complex(np.nan, np.nan)
            continue
        H[p] = sol[i_out]
    return FreqResponse(w, H, model.input_labels[i_in], output_state, singular)


def sampling_bound(model: StateSpaceModel, inputs: Sequence[SignalSpec | None] = ()) -> float:
    """Largest admissible step: 1/20 of the fastest modal or input period."""
    f_modes = float(np.max(np.abs(eigenvalues(model.A).imag))) / (2 * np.pi)
    f_in = max((s.max_frequency for s in inputs if s is not None), default=0.0)
    f_max = max(f_modes, f_in)
    return math.inf if f_max == 0 else 1.0 / (SAMPLES_PER_PERIOD * f_max)


def zoh_discretize(A, B, dt: float):
    """Exact ZOH pair ``(Ad, Bd)`` from ``expm([[A, B], [0, 0]] dt)``."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    m, p = B.shape
    M = np.zeros((m + p, m + p))
    M[:m, :m] = A
    M[:m, m:] = B
    E = expm(M * dt)
    return E[:m, :m], E[:m, m:]


def _input_list(model: StateSpaceModel, inputs) -> list:
    if inputs is None:
        return [None] * len(model.input_labels)
    if isinstance(inputs, Mapping):
        out = [None] * len(model.input_labels)
        for key, sig in inputs.items():
            out[model.input_index(key)] = sig
        return out
    inputs = list(inputs)
    if len(inputs) != len(model.input_labels):
        raise ValueError(f"expected {len(model.input_labels)} input signals, got {len(inputs)}")
    return inputs


def simulate(model: StateSpaceModel, inputs, t_end: float, dt: float, x0=None) -> SimResult:
    """Simulate on the grid ``0, dt, ..., t_end`` with inputs held over each step.

    ``inputs`` is a sequence aligned with ``model.input_labels`` or a mapping
    from input label to :class:`SignalSpec`; ``None`` means zero input.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    if not t_end > 0:
        raise ValueError("t_end must be > 0")
    sigs = _input_list(model, inputs)
    bound = sampling_bound(model, sigs)
    if dt > bound * (1 + 1e-12):
        raise ValueError(f"dt={dt:g} s exceeds the sampling bound {bound:.6g} s "
                         f"({SAMPLES_PER_PERIOD} samples per fastest period)")
    steps = int(round(t_end / dt))
    t = np.arange(steps + 1) * dt
    u = np.zeros((steps + 1, len(sigs)))
    for j, s in enumerate(sigs):
        if s is not None:
            u[:, j] = s(t)
    Ad, Bd = zoh_discretize(model.A, model.B, dt)
    x = np.empty((steps + 1, model.dim))
    x[0] = 0.0 if x0 is None else np.asarray(x0, dtype=float)
    drive = u @ Bd.T
    for k in range(steps):
        x[k + 1] = Ad @ x[k] + drive[k]
    return SimResult(t, x, u, dt, model.state_labels, model.input_labels)


def _window_samples(result: SimResult, fundamental: float, window):
    t0, t1 = window
    if t0 < result.t[0] - 1e-12 or t1 > result.t[-1] + 0.5 * result.dt:
        raise ValueError(f"window {window} outside simulated range [{result.t[0]}, {result.t[-1]}]")
    periods = (t1 - t0) * fundamental
    if abs(periods - round(periods)) > 1e-6 or round(periods) < 1:
        raise ValueError(f"window must span an integer number of fundamental periods, got {periods:g}")
    i0 = int(round((t0 - result.t[0]) / result.dt))
    n = int(round((t1 - t0) / result.dt))
    return i0, n


def harmonic_amplitude(result: SimResult, state: str, frequency: float, window, fundamental: float | None = None) -> float:
    """Peak amplitude of the ``frequency`` component of a state over ``window``."""
    fundamental = fundamental or frequency
    i0, n = _window_samples(result, fundamental, window)
    y = result.state(state)[i0:i0 + n]
    tt = result.t[i0:i0 + n]
    return float(2.0 / n * abs(np.sum(y * np.exp(-2j * np.pi * frequency * tt))))


def thd(result: SimResult, state: str, fundamental: float, window, max_harmonic: int = 25) -> float:
    """RMS of harmonics 2..``max_harmonic`` over the RMS of the fundamental."""
    i0, n = _window_samples(result, fundamental, window)
    y = result.state(state)[i0:i0 + n]
    tt = result.t[i0:i0 + n]
    h = np.arange(1, max_harmonic + 1)
    amps = 2.0 / n * np.abs(np.exp(-2j * np.pi * fundamental * np.outer(h, tt)) @ y)
    return float(np.sqrt(np.sum(amps[1:] ** 2)) / amps[0])


def steady_state_window(t_end: float, fundamental: float, tau: float, t_settle_from: float = 0.0,
                        max_periods: int | None = None) -> tuple[float, float]:
    """Tail window of whole fundamental periods after discarding the transient.

    The discarded span is ``max(5 tau, 10 periods)`` counted from
    ``t_settle_from`` (e.g. the end of a ramp).
    """
    period = 1.0 / fundamental
    start = t_settle_from + max(5 * tau, 10 * period)
    periods = math.floor((t_end - start) / period + 1e-9)
    if periods < 1:
        raise ValueError("simulation too short for a steady-state window")
    if max_periods is not None:
        periods = min(periods, max_periods)
    return (t_end - periods * period, t_end)
