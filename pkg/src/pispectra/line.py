"""State-space model of an unloaded line built from cascaded pi-sections.

State ordering is fixed as ``i_1, v_1, i_2, ..., v_n, i_{n+1}``: ``n + 1``
series branch currents interleaved with ``n`` shunt node voltages, so the
model always has ``2n + 1`` states.  Current ``i_k`` flows from the a-end
towards the b-end.  The two inputs are the terminal voltages ``v_a`` and
``v_b`` (or their references once a feedback gain is closed around them).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping

import numpy as np

__all__ = [
    "ConfigError",
    "LineParams",
    "SectionParams",
    "ControlGains",
    "StateSpaceModel",
    "section_params",
    "build_open_loop",
    "apply_gains",
    "closed_loop_model",
    "load_config",
    "parse_config",
    "write_matrix_csv",
]


class ConfigError(ValueError):
    """Invalid or incomplete model configuration."""


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class LineParams:
    """Per-km line constants and total length."""

    r_per_km: float
    l_per_km: float
    c_per_km: float
    g_per_km: float
    length_km: float

    def __post_init__(self):
        if self.r_per_km < 0 or self.g_per_km < 0:
            raise ConfigError("r_per_km and g_per_km must be >= 0")
        if self.l_per_km <= 0 or self.c_per_km <= 0:
            raise ConfigError("l_per_km and c_per_km must be > 0")
        if self.length_km <= 0:
            raise ConfigError("length_km must be > 0")


@dataclass(frozen=True)
class SectionParams:
    """Lumped R [Ohm], L [H], C [F], G [S] of a single pi-section."""

    R: float
    L: float
    C: float
    G: float = 0.0

    def __post_init__(self):
        if not (self.L > 0 and self.C > 0 and self.R >= 0 and self.G >= 0):
            raise ConfigError(f"invalid section parameters {self}")

    @property
    def r_over_l(self) -> float:
        return self.R / self.L

    @property
    def g_over_c(self) -> float:
        return self.G / self.C

    @property
    def omega0(self) -> float:
        """Natural frequency ``1/sqrt(LC)`` of one section [rad/s]."""
        return 1.0 / np.sqrt(self.L * self.C)


@dataclass(frozen=True)
class ControlGains:
    """Feedback gains of the terminal sources.

    ``kv_a``/``kv_b`` are proportional voltage gains on the local node
    voltage, ``ki_b`` [Ohm] is a virtual resistance on the b-end terminal
    current and ``kx_b`` [Ohm] feeds the remote a-end current ``i_1`` into
    the b-end source.
    """

    kv_a: float = 0.0
    kv_b: float = 0.0
    ki_b: float = 0.0
    kx_b: float = 0.0

    def __post_init__(self):
        for name in ("kv_a", "kv_b", "ki_b", "kx_b"):
            v = getattr(self, name)
            if not (v >= 0 and np.isfinite(v)):
                raise ConfigError(f"{name} must be finite and >= 0, got {v}")

    @property
    def is_open(self) -> bool:
        return self.kv_a == 0 and self.kv_b == 0 and self.ki_b == 0 and self.kx_b == 0

    def as_dict(self) -> dict:
        return {"kv_a": self.kv_a, "kv_b": self.kv_b, "ki_b": self.ki_b, "kx_b": self.kx_b}


def reference_weight(kv: float) -> float:
    """Input weight of a source reference: ``kv`` under voltage feedback, else 1."""
    return kv if kv > 0 else 1.0


@dataclass(frozen=True, eq=False)
class StateSpaceModel:
    """Dense ``dx/dt = A x + B u`` model with labelled states and inputs."""

    A: np.ndarray
    B: np.ndarray
    state_labels: tuple
    input_labels: tuple
    n_sections: int | None = None
    section: SectionParams | None = None
    gains: ControlGains = field(default_factory=ControlGains)

    def __post_init__(self):
        object.__setattr__(self, "A", _frozen(self.A))
        object.__setattr__(self, "B", _frozen(self.B))
        object.__setattr__(self, "state_labels", tuple(self.state_labels))
        object.__setattr__(self, "input_labels", tuple(self.input_labels))
        m = self.A.shape[0]
        if self.A.shape != (m, m) or self.B.shape != (m, len(self.input_labels)):
            raise ValueError("inconsistent A/B/input dimensions")
        if len(self.state_labels) != m:
            raise ValueError("state_labels must have one entry per state")

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def state_index(self, label: str) -> int:
        try:
            return self.state_labels.index(label)
        except ValueError:
            raise KeyError(f"unknown state {label!r}") from None

    def input_index(self, label) -> int:
        if isinstance(label, (int, np.integer)):
            if not 0 <= label < len(self.input_labels):
                raise KeyError(f"input index {label} out of range")
            return int(label)
        try:
            return self.input_labels.index(label)
        except ValueError:
            raise KeyError(f"unknown input {label!r}") from None


def section_params(line: LineParams, n: int) -> SectionParams:
    """Split a line into ``n`` equal-length sections."""
    if int(n) != n or n < 1:
        raise ConfigError(f"number of sections must be an integer >= 1, got {n}")
    frac = line.length_km / n
    return SectionParams(
        R=line.r_per_km * frac,
        L=line.l_per_km * frac,
        C=line.c_per_km * frac,
        G=line.g_per_km * frac,
    )


def line_state_labels(n: int) -> list[str]:
    labels = []
    for k in range(1, n + 1):
        labels += [f"i_{k}", f"v_{k}"]
    labels.append(f"i_{n + 1}")
    return labels


def build_open_loop(sec: SectionParams, n: int) -> StateSpaceModel:
    """Tridiagonal 2-Toeplitz model of ``n`` sections between two ideal sources."""
    if int(n) != n or n < 1:
        raise ConfigError(f"number of sections must be an integer >= 1, got {n}")
    n = int(n)
    R, L, C, G = sec.R, sec.L, sec.C, sec.G
    m = 2 * n + 1
    A = np.zeros((m, m))
    for r in range(0, m, 2):
        A[r, r] = -R / L
        if r > 0:
            A[r, r - 1] = 1 / L
        if r < m - 1:
            A[r, r + 1] = -1 / L
    for r in range(1, m, 2):
        A[r, r - 1] = 1 / C
        A[r, r] = -G / C
        A[r, r + 1] = -1 / C
    B = np.zeros((m, 2))
    B[0, 0] = 1 / L
    B[-1, 1] = -1 / L
    return StateSpaceModel(A, B, line_state_labels(n), ("v_a", "v_b"), n, sec)


def apply_gains(model: StateSpaceModel, gains: ControlGains) -> StateSpaceModel:
    """Fold the source feedback laws into ``A`` and ``B``.

    The sources become::

        v_a = w_a v_ref_a - kv_a v_1
        v_b = w_b v_ref_b - kv_b v_n + ki_b i_{n+1} + kx_b i_1

    with ``w = kv`` when ``kv > 0`` and ``w = 1`` otherwise, so a source
    without voltage feedback keeps applying its reference directly.
    """
    if not model.gains.is_open:
        raise ValueError("apply_gains expects an open-loop model")
    if model.section is None:
        raise ValueError("apply_gains needs a line model built by build_open_loop")
    if gains.is_open:
        return model
    L, R = model.section.L, model.section.R
    A = np.array(model.A)
    B = np.array(model.B)
    A[0, 1] = -(1 + gains.kv_a) / L
    A[-1, -2] = (1 + gains.kv_b) / L
    A[-1, -1] = -(R + gains.ki_b) / L
    A[-1, 0] = -gains.kx_b / L
    B[0, 0] = reference_weight(gains.kv_a) / L
    B[-1, 1] = -reference_weight(gains.kv_b) / L
    labels = tuple(
        f"{lab}_ref" if kv > 0 else lab
        for lab, kv in zip(model.input_labels, (gains.kv_a, gains.kv_b))
    )
    return replace(model, A=A, B=B, input_labels=labels, gains=gains)


def closed_loop_model(sec: SectionParams, n: int, gains: ControlGains | None = None) -> StateSpaceModel:
    model = build_open_loop(sec, n)
    return model if gains is None else apply_gains(model, gains)


_LINE_KEYS = ("r_per_km", "l_per_km", "c_per_km", "g_per_km", "length_km")
_GAIN_KEYS = ("kv_a", "kv_b", "ki_b", "kx_b")


def parse_config(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key = key.strip()
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = float(value.strip())
        except ValueError:
            raise ConfigError(f"line {lineno}: {key} is not a number: {value.strip()!r}") from None
    return values


def config_from_mapping(values: Mapping[str, float]):
    unknown = set(values) - set(_LINE_KEYS) - set(_GAIN_KEYS) - {"n_sections"}
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key in _LINE_KEYS + ("n_sections",):
        if key not in values:
            raise ConfigError(f"missing required config key {key!r}")
    n = values["n_sections"]
    if n != int(n) or n < 1:
        raise ConfigError(f"n_sections must be an integer >= 1, got {n}")
    line = LineParams(**{k: values[k] for k in _LINE_KEYS})
    gains = ControlGains(**{k: values.get(k, 0.0) for k in _GAIN_KEYS})
    return line, int(n), gains


def load_config(path) -> tuple[LineParams, int, ControlGains]:
    """Read a line configuration file into ``(line, n_sections, gains)``."""
    return config_from_mapping(parse_config(Path(path).read_text()))


def write_matrix_csv(path, M) -> None:
    """Row-major CSV with shortest round-trip decimal formatting."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in M:
            w.writerow([repr(float(x)) for x in row])
