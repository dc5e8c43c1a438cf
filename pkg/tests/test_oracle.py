import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pispectra.line import ControlGains, closed_loop_model
from pispectra.modes import (
    Mode,
    Spectrum,
    conjugate_symmetrize,
    modes_from_eigenvalues,
    theta_of,
)
from pispectra.oracle import (
    NumericalError,
    OracleReport,
    compare,
    eigenvalues,
    match_eigenvalues,
    max_relative_error,
    numeric_spectrum,
    poly_roots,
)
from pispectra.spectrum import analytic_spectrum, char_poly, open_loop_spectrum


def _spec(values, method="analytic"):
    return Spectrum(modes_from_eigenvalues(values), None, ControlGains(), method)


def test_numeric_unit_section():
    ev = eigenvalues([[0, -1, 0], [1, 0, -1], [0, 1, 0]])
    assert max_relative_error(ev, [0, 1j * math.sqrt(2), -1j * math.sqrt(2)]) < 1e-9


def test_numeric_diagonal():
    ev = eigenvalues(np.diag([-1.0, -2.0, -3.0]))
    np.testing.assert_allclose(np.sort(ev.real), [-3, -2, -1])


def test_numeric_matches_open_loop(sec6):
    r = compare(open_loop_spectrum(sec6, 6), numeric_spectrum(closed_loop_model(sec6, 6)))
    assert r.max_rel_error < 1e-9


def test_nonfinite_matrix_raises():
    with pytest.raises(NumericalError):
        eigenvalues(np.array([[np.nan, 0], [0, 1.0]]))


def test_poly_roots_examples():
    np.testing.assert_allclose(np.sort(poly_roots([2, -3, 1]).real), [1, 2])
    r = poly_roots([2, 0, 1])
    np.testing.assert_allclose(np.sort(r.imag), [-math.sqrt(2), math.sqrt(2)])
    np.testing.assert_allclose(r.real, 0, atol=1e-15)
    assert poly_roots([3, 2]) == pytest.approx([-1.5])


@pytest.mark.parametrize("coeffs", [[1, 0], [1], [], [1, np.inf, 1]])
def test_poly_roots_rejects(coeffs):
    with pytest.raises(ValueError):
        poly_roots(coeffs)


def test_poly_roots_char_poly_110kv(sec6):
    assert max_relative_error(poly_roots(char_poly(sec6, 6)), numeric_spectrum(closed_loop_model(sec6, 6)).eigenvalues) < 1e-6


@given(st.integers(1, 30), st.integers(0, 2 ** 32 - 1))
def test_poly_roots_inverts_poly(m, seed):
    # separated roots on the unit circle: angles jittered around an even grid
    jitter = np.random.default_rng(seed).uniform(-0.2, 0.2, m)
    roots = np.exp(2j * np.pi * (np.arange(m) + jitter) / m)
    coeffs = np.poly(roots)[::-1]
    got = poly_roots(coeffs)
    i, j = match_eigenvalues(got, roots)
    assert np.max(np.abs(got[i] - roots[j])) < 1e-8


@given(st.integers(1, 25), st.integers(0, 2 ** 32 - 1))
def test_numeric_spectrum_conjugation_and_trace(m, seed):
    A = np.random.default_rng(seed).normal(size=(m, m))
    ev = eigenvalues(A)
    assert max_relative_error(ev, ev.conj()) < 1e-9
    assert ev.sum().real == pytest.approx(np.trace(A), rel=1e-9, abs=1e-9 * np.linalg.norm(A))


def test_compare_identical(sec6):
    s = open_loop_spectrum(sec6, 6)
    assert compare(s, s).max_rel_error == 0.0


def test_compare_uniform_perturbation():
    base = np.exp(1j * np.linspace(0.3, 2.8, 5))
    values = np.concatenate([base, base.conj()])
    a, b = _spec(values + 1e-8), _spec(values, "oracle")
    assert compare(a, b).max_rel_error == pytest.approx(1e-8, rel=1e-6)


def test_compare_cardinality_mismatch():
    with pytest.raises(ValueError, match="cardinality"):
        compare(_spec([-1.0, -2.0]), _spec([-1.0], "oracle"))


def test_matching_is_bijection(sec6):
    g = ControlGains(kv_b=10.0)
    r = compare(analytic_spectrum(sec6, 6, g), numeric_spectrum(closed_loop_model(sec6, 6, g)))
    assert r.max_rel_error < 1e-6
    assert sorted(p for p, _ in r.matching) == list(range(13))
    assert sorted(q for _, q in r.matching) == list(range(13))


def test_hungarian_beats_sorting():
    # sorting by real part would pair 0 with 1+1e-3j and 1 with 1e-3j
    i, j = match_eigenvalues([0, 1], [1 + 1e-3j, 1e-3j])
    assert dict(zip(i, j)) == {0: 1, 1: 0}


def test_relative_error_floor():
    assert max_relative_error([1e-9], [0.0]) == pytest.approx(1e-3)


def test_report_json_round_trip(sec6):
    g = ControlGains(ki_b=2.0)
    r = compare(analytic_spectrum(sec6, 6, g), numeric_spectrum(closed_loop_model(sec6, 6, g)))
    back = OracleReport.from_dict(json.loads(r.to_json()))
    assert back.max_rel_error == r.max_rel_error
    assert back.matching == r.matching
    np.testing.assert_array_equal(back.analytic.eigenvalues, r.analytic.eigenvalues)
    np.testing.assert_array_equal(back.numeric.thetas, r.numeric.thetas)


# ------------------------------------------------------------------ modes


def test_mode_damping_ratio():
    assert Mode(1, 0j, complex(-3, 4)).damping_ratio == pytest.approx(0.6)
    assert math.isnan(Mode(0, 0j, 0j).damping_ratio)


def test_spectrum_json_nan_round_trip(unit_lossless):
    s = open_loop_spectrum(unit_lossless, 1)
    d = json.loads(s.to_json())
    assert d["modes"][0]["damping_ratio"] is None
    back = Spectrum.from_dict(d)
    np.testing.assert_array_equal(back.eigenvalues, s.eigenvalues)
    assert math.isnan(back.modes[0].damping_ratio)


def test_spectrum_csv(tmp_path, sec6):
    p = tmp_path / "s.csv"
    open_loop_spectrum(sec6, 6).write_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0] == "k,re_lambda,im_lambda,theta_re,theta_im,damping_ratio"
    assert len(lines) == 14


def test_spectrum_rejects_unknown_method():
    with pytest.raises(ValueError):
        Spectrum((), None, ControlGains(), "guess")


def test_modes_from_eigenvalues_indices():
    modes = modes_from_eigenvalues([-1 + 5j, -1 - 5j, -2, -1 + 2j, -1 - 2j])
    assert [m.k for m in modes] == [0, 1, -1, 2, -2]
    assert all(np.isnan(m.theta) for m in modes)


def test_conjugate_symmetrize_exact():
    v = conjugate_symmetrize([-1 + 2j + 1e-12, -1 - 2j, -3 + 1e-14j])
    np.testing.assert_array_equal(np.sort_complex(v), np.sort_complex(v.conj()))


def test_theta_of_open_loop(sec6):
    s = open_loop_spectrum(sec6, 6)
    th = theta_of(np.array([m.lam for m in s.complex_modes()]), sec6)
    np.testing.assert_allclose(th.real, np.arange(1, 7) * np.pi / 7, rtol=1e-9)
