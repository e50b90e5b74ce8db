import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from hyperpos.errors import DegenerateSpectrum, DomainError, Divergent, ParameterError
from hyperpos.matrixarg import (
    HermitianSpec,
    batch_schur,
    extended_hc_check,
    extended_hc_pfq_check,
    extended_series,
    haar_unitaries,
    haar_unitary,
    hciz_check,
    hciz_det_side,
    mean_value_check,
    monte_carlo,
    pfq_matrix,
    _exp_trace,
)
from hyperpos.symfun import beta_n, partitions_of, schur_eval, zonal

E = math.e


def within(mc, target, k=3.0):
    return abs(mc.mean - float(target)) <= k * mc.std_error + 1e-12


def test_haar_unitary_is_unitary():
    rng = np.random.default_rng(0)
    for n in (1, 2, 4, 7):
        U = haar_unitary(n, rng)
        assert np.allclose(U.conj().T @ U, np.eye(n), atol=1e-12)
        assert np.allclose(np.linalg.norm(U, axis=0), 1, atol=1e-12)
    u = haar_unitary(1, rng)
    assert math.isclose(abs(u[0, 0]), 1, rel_tol=1e-14)


def test_haar_marginal():
    rng = np.random.default_rng(1)
    for n in (2, 3):
        U = haar_unitaries(n, 100_000, rng)
        w = np.abs(U[:, 0, 0]) ** 2
        se = w.std(ddof=1) / math.sqrt(len(w))
        assert abs(w.mean() - 1 / n) < 3 * se


def test_haar_phase_is_uniform():
    # E[U_11^k] = 0 for Haar: the phase must not be biased by QR conventions
    rng = np.random.default_rng(2)
    U = haar_unitaries(2, 100_000, rng)
    z = U[:, 0, 0]
    assert abs(z.mean()) < 0.01 and abs((z**2).mean()) < 0.01


def test_batch_schur_matches_exact():
    eigs = np.array([[0.3, -0.2, 0.7], [1.1, 0.4, 0.0]], dtype=complex)
    for lam in [(), (1,), (2, 1), (3, 1, 1), (2, 2)]:
        vals = batch_schur(lam, eigs)
        for row, v in zip(eigs, vals):
            assert np.isclose(v, schur_eval(lam, row.real.tolist()), rtol=1e-12, atol=1e-14)


def test_pfq_matrix_spot_values():
    assert math.isclose(pfq_matrix([], [], [1.0, 0.0], 30).value, E, rel_tol=1e-15)
    assert math.isclose(pfq_matrix([1], [], [0.5, 1 / 3], 120).value, 3.0, rel_tol=1e-12)
    for a, b in [((), ()), ((1,), ()), ((Fraction(1, 2),), (Fraction(3, 2),))]:
        assert pfq_matrix(a, b, [0, 0], 10).value == 1


def test_pfq_matrix_1f0_is_product():
    a = Fraction(3, 2)
    x = [0.3, -0.2, 0.1]
    want = math.prod((1 - t) ** -1.5 for t in x)
    assert math.isclose(pfq_matrix([a], [], x, 60).value, want, rel_tol=1e-12)


def test_pfq_matrix_scalar_case_is_classical():
    s = pfq_matrix([0.5, 1.5], [2.5], [0.4], 80)
    assert math.isclose(s.value, float(mpmath.hyp2f1(0.5, 1.5, 2.5, 0.4)), rel_tol=1e-13)


def test_pfq_matrix_errors():
    with pytest.raises(ParameterError):
        pfq_matrix([1], [1], [0.1, 0.2], 5)  # -b + 2 - 1 = 0
    with pytest.raises(Divergent):
        pfq_matrix([1, 1], [], [0.1, 0.2], 5)
    with pytest.raises(DomainError):
        pfq_matrix([1], [], [1.0, 0.2], 5)


def test_trace_power_exact():
    x = [Fraction(1, 2), Fraction(-2, 3), Fraction(5, 4), 2]
    for l in range(7):
        assert sum(zonal(lam, x) for lam in partitions_of(l, 4)) == sum(x, Fraction(0)) ** l


def test_hciz_det_side_values():
    assert math.isclose(hciz_det_side([1.0, 0.0], [1.0, 0.0]), E - 1, rel_tol=1e-14)
    with pytest.raises(DegenerateSpectrum):
        hciz_check([0.5, 0.5], [1.0, 0.0], 100, 0, 10)


def test_hciz_scalar_case():
    det_side, mc, series = hciz_check([1.0], [1.0], 1000, 0, 30)
    assert math.isclose(det_side, E) and math.isclose(mc.mean, E) and math.isclose(series.value, E)


def test_hciz_n2_agrees():
    x, y = [0.9, 0.2], [0.7, 0.1]
    det_side, mc, series = hciz_check(x, y, 200_000, 5, 30)
    assert within(mc, det_side)
    assert math.isclose(series.value, det_side, rel_tol=1e-12)
    assert mc.batches == 100


def test_extended_scalar_case():
    mc, series = extended_hc_check([[1.0]] * 4, 1000, 0, 30)
    assert math.isclose(mc.mean, E) and math.isclose(series.value, E, rel_tol=1e-15)


def test_extended_m1_matches_hciz():
    x, y = [0.8, 0.3], [0.6, 0.0]
    _, hc, _ = hciz_check(x, y, 20_000, 11, 20)
    mc, _ = extended_hc_check([x, y], 20_000, 11, 20)
    assert math.isclose(hc.mean * beta_n(2), mc.mean, rel_tol=1e-14)


def test_extended_exact_series_and_pfq_00():
    spectra = [[Fraction(1, 2), 0], [Fraction(1, 3), Fraction(1, 4)], [Fraction(1, 5), 0], [Fraction(2, 5), Fraction(1, 10)]]
    ser = extended_series((), (), spectra, 6)
    assert isinstance(ser.value, Fraction)
    assert ser == extended_series((), (), spectra, 6)


def test_extended_small_mc():
    spectra = [[0.5, 0.1], [0.4, 0.0], [0.3, 0.2], [0.45, 0.05]]
    mc, series = extended_hc_check(spectra, 100_000, 3, 20)
    assert series.last_shell_magnitude < 1e-10
    # unit-level check at 4 SE; the acceptance suite applies 3 SE at 1e6 samples
    assert within(mc, series.value, k=4.0)


def test_extended_pfq_scalar():
    mc, series = extended_hc_pfq_check([1], [], [[0.5], [0.5]], 1000, 0, 200)
    assert math.isclose(series.value, 4 / 3, rel_tol=1e-14)
    assert math.isclose(mc.mean, 4 / 3, rel_tol=1e-12)


def test_extended_pfq_00_equals_exp_path():
    spectra = [[0.5, 0.1], [0.4, 0.0], [0.3, 0.2], [0.45, 0.05]]
    _, s1 = extended_hc_pfq_check([], [], spectra, 1000, 0, 20)
    _, s2 = extended_hc_check(spectra, 1000, 0, 20)
    assert s1 == s2


def test_extended_pfq_convergence_check():
    with pytest.raises(DomainError):
        extended_hc_pfq_check([1], [], [[1.0, 0.1], [0.2, 0.1]], 1000, 0, 10)


def test_unitary_invariance():
    rng = np.random.default_rng(4)
    spectra = [[0.5, 0.1], [0.4, 0.0], [0.3, 0.2], [0.45, 0.05]]
    diag = [HermitianSpec(s).matrix() for s in spectra]
    W = [haar_unitary(2, rng) for _ in spectra]
    rotated = [w @ d @ w.conj().T for w, d in zip(W, diag)]
    a = monte_carlo(diag, _exp_trace, 50_000, 1)
    b = monte_carlo(rotated, _exp_trace, 50_000, 2)
    assert abs(a.mean - b.mean) <= 3 * math.hypot(a.std_error, b.std_error)


@pytest.mark.parametrize("lam", [(1,), (2,), (1, 1)])
def test_mean_value_property(lam):
    mc, exact = mean_value_check(lam, [0.9, 0.3], [0.6, -0.4], 100_000, 8)
    assert within(mc, exact)


def test_threads_do_not_change_estimates():
    spectra = [[0.5, 0.1], [0.4, 0.0]]
    a, _ = extended_hc_check(spectra, 10_000, 9, 10, threads=1)
    b, _ = extended_hc_check(spectra, 10_000, 9, 10, threads=3)
    assert a == b
