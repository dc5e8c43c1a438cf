import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pispectra.dynamics import (
    Ramp,
    SignalSpec,
    SimResult,
    Tone,
    frequency_response,
    harmonic_amplitude,
    sampling_bound,
    simulate,
    steady_state_window,
    thd,
    zoh_discretize,
)
from pispectra.line import (
    ControlGains,
    SectionParams,
    closed_loop_model,
    section_params,
)
from pispectra.oracle import eigenvalues


def _dc_ladder(n_series: int, node: int) -> float:
    """Node potential of a uniform resistive ladder grounded at one end, 1 V at the other."""
    m = n_series - 1
    G = 2 * np.eye(m) - np.eye(m, k=1) - np.eye(m, k=-1)
    rhs = np.zeros(m)
    rhs[-1] = 1.0
    return float(np.linalg.solve(G, rhs)[node - 1])


def test_dc_gain_is_resistive_divider(sec6):
    model = closed_loop_model(sec6, 6)
    fr = frequency_response(model, "v_b", "v_3", [1e-3])
    expected = _dc_ladder(7, 3)
    assert expected == pytest.approx(3 / 7, rel=1e-14)
    assert fr.magnitude[0] == pytest.approx(expected, rel=1e-6)
    assert fr.magnitude_db[0] == pytest.approx(20 * math.log10(3 / 7), abs=1e-4)


def test_frequency_response_peaks_at_modal_frequencies(sec6):
    model = closed_loop_model(sec6, 6)
    grid = np.geomspace(500, 3e4, 6000)
    fr = frequency_response(model, "v_b", "v_3", grid)
    mag = fr.magnitude
    peaks = np.nonzero((mag[1:-1] > mag[:-2]) & (mag[1:-1] > mag[2:]))[0] + 1
    wd = np.abs(eigenvalues(model.A).imag)
    assert len(peaks) >= 3
    for p in peaks:
        step = grid[p + 1] - grid[p]
        assert np.min(np.abs(wd - grid[p])) <= step


def test_lossless_resonance_flagged(unit_lossless):
    model = closed_loop_model(unit_lossless, 1)
    w = np.array([1.0, math.sqrt(2) * (1 - 1e-6), math.sqrt(2), 3.0])
    fr = frequency_response(model, "v_a", "v_1", w)
    assert fr.magnitude[1] > 1e4 * fr.magnitude[0]
    assert fr.singular[2] and np.isnan(fr.H[2])
    assert not fr.singular[[0, 1, 3]].any()


def test_frequency_response_errors(sec6):
    model = closed_loop_model(sec6, 6)
    with pytest.raises(KeyError):
        frequency_response(model, "v_b", "v_99", [1.0])
    with pytest.raises(ValueError):
        frequency_response(model, "v_b", "v_3", [])


def test_frequency_response_csv(tmp_path, sec6):
    fr = frequency_response(closed_loop_model(sec6, 6), 1, "v_3", np.geomspace(1, 1e4, 5))
    p = tmp_path / "bode.csv"
    fr.write_csv(p)
    data = np.loadtxt(p, delimiter=",", skiprows=1)
    np.testing.assert_array_equal(data[:, 0], fr.omega)
    np.testing.assert_array_equal(data[:, 1], fr.magnitude)


# ----------------------------------------------------------------- signals


def test_ramp_envelope():
    r = Ramp(0.1, 0.02)
    np.testing.assert_allclose(r([0.0, 0.1, 0.11, 0.12, 1.0]), [0, 0, 0.5, 1, 1])
    with pytest.raises(ValueError):
        Ramp(0.0, 0.0)


def test_signal_round_trip():
    s = SignalSpec.sine(1.0, 50.0, harmonics=[(250.0, 0.02)], ramp=Ramp(0.0, 0.002))
    assert SignalSpec.from_dict(s.to_dict()) == s
    assert s.max_frequency == 250.0
    with pytest.raises(ValueError):
        Tone(1.0, -1.0)


# -------------------------------------------------------------- simulation


def test_zero_input_zero_state(sec6):
    res = simulate(closed_loop_model(sec6, 6), None, 0.01, 1e-5)
    assert not np.any(res.x)
    assert res.x.shape == (1001, 13)
    np.testing.assert_allclose(np.diff(res.t), 1e-5, rtol=1e-9)


def test_sampling_bound_enforced(sec6):
    model = closed_loop_model(sec6, 6)
    bound = sampling_bound(model)
    assert bound == pytest.approx(2 * math.pi / (20 * np.max(eigenvalues(model.A).imag)))
    with pytest.raises(ValueError, match=f"{bound:.6g}"):
        simulate(model, None, 0.01, 2 * bound)


def test_input_sequence_length_checked(sec6):
    with pytest.raises(ValueError):
        simulate(closed_loop_model(sec6, 6), [None], 0.01, 1e-5)


def test_zoh_matches_eigendecomposition(line110):
    # small shunt conductance so both R and G are positive
    sec = section_params(line110.__class__(0.02, 0.5e-3, 0.4e-6, 1e-8, 100.0), 6)
    model = closed_loop_model(sec, 6, ControlGains(kv_b=2.0, ki_b=5.0))
    x0 = np.random.default_rng(1).normal(size=model.dim)
    res = simulate(model, None, 0.05, 1e-5, x0=x0)
    lam, V = np.linalg.eig(model.A)
    c = np.linalg.solve(V, x0)
    exact = (V @ (c[:, None] * np.exp(np.outer(lam, res.t)))).T.real
    err = np.linalg.norm(res.x - exact, axis=1) / np.linalg.norm(exact, axis=1)
    assert np.max(err) < 1e-9


def test_zoh_constant_input_is_exact():
    A = np.array([[-2.0]])
    B = np.array([[3.0]])
    Ad, Bd = zoh_discretize(A, B, 0.1)
    assert Ad[0, 0] == pytest.approx(math.exp(-0.2), rel=1e-15)
    assert Bd[0, 0] == pytest.approx(1.5 * (1 - math.exp(-0.2)), rel=1e-14)


def test_real_mode_time_constant(sec6):
    # the sum of all line currents is a left eigenvector for -R/L
    model = closed_loop_model(sec6, 6)
    step = SignalSpec((Tone(1.0, 0.0, math.pi / 2),))
    res = simulate(model, [step, None], 0.1, 1e-5)
    total = res.x[:, 0::2].sum(axis=1)
    final = 1.0 / sec6.R
    t = res.t[1:]
    tau = -t / np.log(1 - total[1:] / final)
    np.testing.assert_allclose(tau[t < 0.08], 0.025, rtol=1e-6)


@given(st.floats(-5.0, 5.0).filter(lambda a: abs(a) > 1e-3))
def test_linearity(alpha):
    sec = SectionParams(1 / 3, 8.3333e-3, 6.6667e-6, 0.0)
    model = closed_loop_model(sec, 6, ControlGains(ki_b=10.0))
    sig = SignalSpec.sine(1.0, 50.0, harmonics=[(250.0, 0.02)], ramp=Ramp(0.0, 0.002))
    a = simulate(model, [sig, sig], 0.01, 1e-5)
    b = simulate(model, [sig.scaled(alpha), sig.scaled(alpha)], 0.01, 1e-5)
    np.testing.assert_allclose(b.x, alpha * a.x, rtol=1e-12, atol=1e-12 * np.max(np.abs(alpha * a.x)))


@given(st.integers(0, 2 ** 32 - 1))
def test_bounded_input_bounded_state(seed):
    rng = np.random.default_rng(seed)
    sec = SectionParams(1 / 3, 8.3333e-3, 6.6667e-6, 0.0)
    gains = ControlGains(kv_b=float(rng.uniform(0, 10)), ki_b=float(rng.uniform(0, 100)))
    model = closed_loop_model(sec, 6, gains)
    tones = tuple(Tone(float(rng.uniform(0, 1)), float(rng.uniform(0, 2000))) for _ in range(3))
    sig = SignalSpec(tones)
    res = simulate(model, [sig, sig], 0.25, 2e-5)
    assert np.all(np.isfinite(res.x))
    assert np.max(np.abs(res.x)) < 1e6 * 3


def test_simresult_csv(tmp_path, sec6):
    sig = SignalSpec.sine(1.0, 50.0)
    res = simulate(closed_loop_model(sec6, 6), [sig, sig], 0.002, 1e-5)
    p = tmp_path / "sim.csv"
    res.write_csv(p, ["v_3"])
    data = np.loadtxt(p, delimiter=",", skiprows=1)
    np.testing.assert_array_equal(data[:, 0], res.t)
    np.testing.assert_array_equal(data[:, 1], res.state("v_3"))
    with pytest.raises(KeyError):
        res.state("v_99")


# --------------------------------------------------------------------- THD


def _synthetic(y_fn, t_end=0.2, dt=1e-4):
    t = np.arange(int(round(t_end / dt)) + 1) * dt
    return SimResult(t, y_fn(t)[:, None], np.zeros((len(t), 0)), dt, ("y",), ())


def test_thd_pure_sine():
    res = _synthetic(lambda t: np.sin(2 * np.pi * 50 * t))
    assert thd(res, "y", 50.0, (0.1, 0.2)) < 1e-9


def test_thd_third_harmonic():
    res = _synthetic(lambda t: np.sin(2 * np.pi * 50 * t) + 0.1 * np.sin(2 * np.pi * 150 * t + 0.3))
    assert thd(res, "y", 50.0, (0.1, 0.2)) == pytest.approx(0.1, abs=1e-6)
    assert harmonic_amplitude(res, "y", 150.0, (0.1, 0.2), 50.0) == pytest.approx(0.1, abs=1e-9)


def test_thd_window_errors():
    res = _synthetic(lambda t: np.sin(2 * np.pi * 50 * t))
    with pytest.raises(ValueError, match="outside"):
        thd(res, "y", 50.0, (0.1, 0.3))
    with pytest.raises(ValueError, match="integer"):
        thd(res, "y", 50.0, (0.1, 0.115))


def test_steady_state_window_rule():
    # 10 periods (200 ms) outlast 5 tau (125 ms)
    assert steady_state_window(0.6, 50.0, 0.025) == pytest.approx((0.2, 0.6))
    assert steady_state_window(1.0, 50.0, 0.1, t_settle_from=0.1) == pytest.approx((0.6, 1.0))
    assert steady_state_window(1.0, 50.0, 0.0, max_periods=5) == pytest.approx((0.9, 1.0))
    with pytest.raises(ValueError):
        steady_state_window(0.1, 50.0, 0.025)
