"""Shared parameter generators for property tests."""
import numpy as np
from hypothesis import strategies as st

from pispectra.line import ControlGains, SectionParams


def make_section(r_over_l: float, w0: float, g_over_c: float, L: float) -> SectionParams:
    C = 1.0 / (w0 ** 2 * L)
    return SectionParams(r_over_l * L, L, C, g_over_c * C)


def random_section(rng: np.random.Generator) -> SectionParams:
    """R/L in [1, 100] 1/s, 1/sqrt(LC) in [1e3, 1e5] rad/s, G/C in [0, 10] 1/s."""
    return make_section(rng.uniform(1, 100), 10 ** rng.uniform(3, 5), rng.uniform(0, 10), 10 ** rng.uniform(-3, -1))


sections = st.builds(
    make_section,
    st.floats(1.0, 100.0),
    st.floats(3.0, 5.0).map(lambda e: 10 ** e),
    st.floats(0.0, 10.0),
    st.floats(-3.0, -1.0).map(lambda e: 10 ** e),
)

section_counts = st.integers(1, 20)


def impedance_gain(sec: SectionParams, frac: float) -> float:
    """A current gain expressed as a fraction of the section surge impedance."""
    return frac * float(np.sqrt(sec.L / sec.C))


@st.composite
def gain_variants(draw, sec: SectionParams):
    kind = draw(st.sampled_from(["open", "kv", "ki", "kx", "kv+ki", "kv_a+kv_b+ki+kx"]))
    kv = draw(st.floats(0.01, 20.0))
    frac = draw(st.floats(0.01, 5.0))
    if kind == "open":
        return ControlGains()
    if kind == "kv":
        return ControlGains(kv_b=kv)
    if kind == "ki":
        return ControlGains(ki_b=impedance_gain(sec, frac))
    if kind == "kx":
        return ControlGains(kx_b=impedance_gain(sec, frac))
    if kind == "kv+ki":
        return ControlGains(kv_b=kv, ki_b=impedance_gain(sec, frac))
    return ControlGains(kv_a=draw(st.floats(0.0, 5.0)), kv_b=kv, ki_b=impedance_gain(sec, frac),
                        kx_b=impedance_gain(sec, draw(st.floats(0.0, 2.0))))
