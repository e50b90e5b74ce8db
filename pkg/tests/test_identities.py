import math
import random
from fractions import Fraction

import mpmath
import pytest

from hyperpos.errors import DomainError, Divergent, ParameterError
from hyperpos.hyperdet import hyperdet
from hyperpos.identities import binet_cauchy_discrete, exp_schur_sum, htp_scan, pfq_schur_sum
from hyperpos.kernels import EvaluationGrid, KernelSpec, kernel_array, weyl_sample

from oracles import laplace_det, rand_fraction


def rand_phi(rng, order, n, size):
    return [[[Fraction(rng.randint(-3, 3)) for _ in range(size)] for _ in range(n)] for _ in range(order)]


def test_binet_cauchy_matrix_case_is_cauchy_binet():
    rng = random.Random(0)
    for _ in range(5):
        phi = rand_phi(rng, 2, 2, 3)
        lhs, rhs = binet_cauchy_discrete(phi, [1, 1, 1])
        # classical: det(F G^T) = sum over 2-subsets of det F_S det G_S
        F, G = phi
        M = [[sum(F[r][x] * G[s][x] for x in range(3)) for s in range(2)] for r in range(2)]
        assert lhs == rhs == laplace_det(M)


@pytest.mark.parametrize("order,n,size", [(2, 3, 5), (4, 2, 3), (4, 2, 5), (4, 3, 4), (6, 2, 3)])
def test_binet_cauchy_exact(order, n, size):
    rng = random.Random(order + n + size)
    for _ in range(3):
        phi = rand_phi(rng, order, n, size)
        weights = [rand_fraction(rng, span=3) for _ in range(size)]
        lhs, rhs = binet_cauchy_discrete(phi, weights)
        assert lhs == rhs


def test_binet_cauchy_small_ground_set():
    rng = random.Random(1)
    lhs, rhs = binet_cauchy_discrete(rand_phi(rng, 4, 3, 2), [1, 1])
    assert lhs == 0 and rhs == 0


def test_exp_schur_matrix_case():
    g = EvaluationGrid(((1.0, 0.0), (1.0, 0.0)))
    s = exp_schur_sum(g, 20)
    assert math.isclose(s.value, math.e - 1, rel_tol=1e-15)
    # exact partial sums are sum_{k<=W} 1/(k+1)!
    ge = EvaluationGrid(((1, 0), (1, 0)))
    assert exp_schur_sum(ge, 6).value == sum(Fraction(1, math.factorial(k + 1)) for k in range(7))


def test_exp_schur_matches_engine_and_converges():
    for i in range(5):
        g = weyl_sample(2, 2, box=(0, 0.9), min_gap=0.05, seed=3, index=i)
        engine = hyperdet(kernel_array(KernelSpec.exp_product(4), g))
        errs = [abs(exp_schur_sum(g, W).value - engine) / abs(engine) for W in (10, 15, 20, 25)]
        assert errs[-1] < 1e-10
        assert all(b <= a * 1.0001 + 1e-14 for a, b in zip(errs, errs[1:]))
        last = exp_schur_sum(g, 10)
        assert last.last_shell_magnitude >= 0


def test_pfq_00_identical_to_exp_on_rationals():
    g = EvaluationGrid(((Fraction(1, 2), 0), (Fraction(3, 4), Fraction(1, 4)), (1, Fraction(1, 3)), (Fraction(2, 3), 0)))
    assert pfq_schur_sum([], [], g, 8) == exp_schur_sum(g, 8)


def test_pfq_10_matches_engine():
    g = weyl_sample(2, 2, box=(0, 0.6), min_gap=0.05, seed=4)
    engine = hyperdet(kernel_array(KernelSpec.neg_binomial(1, 4), g))
    series = pfq_schur_sum([1], [], g, 60).value
    assert math.isclose(series, engine, rel_tol=1e-9)


def test_pfq_n1_is_taylor_series():
    g = EvaluationGrid(((0.5,), (0.8,)))
    s = pfq_schur_sum([1.5], [2.5], g, 60)
    assert math.isclose(s.value, float(mpmath.hyp1f1(1.5, 2.5, 0.4)), rel_tol=1e-14)


def test_pfq_parameter_checks():
    g = EvaluationGrid(((0.5, 0.1), (0.9, 0.2)))
    with pytest.raises(ParameterError):
        pfq_schur_sum([1], [-2], g, 5)
    with pytest.raises(Divergent):
        pfq_schur_sum([1, 1], [], g, 5)
    with pytest.raises(DomainError):
        pfq_schur_sum([1], [], EvaluationGrid(((1.5, 0.1), (0.9, 0.2))), 5)


def test_htp_scan_exp_nonnegative_box():
    r = htp_scan(KernelSpec.exp_product(4), 2, 2, 200, seed=7)
    assert r.violations == 0 and r.min_det > 0
    assert set(r.to_json()) >= {"kernel", "m", "n", "samples", "min_det", "violations", "seed"}


def test_htp_scan_classical_tp_negative_box():
    r = htp_scan(KernelSpec.exp_product(2), 1, 3, 300, seed=7, box=(-1, 1))
    assert r.violations == 0


def test_htp_scan_reproducible_and_worker_independent():
    spec = KernelSpec.neg_binomial(0.5, 4)
    a = htp_scan(spec, 2, 2, 100, seed=3, box=(0, 0.9))
    b = htp_scan(spec, 2, 2, 100, seed=3, box=(0, 0.9), workers=4)
    assert a.to_json() == b.to_json()


def test_htp_scan_counts_violations():
    # the power kernel fails on positive boxes with ample spread
    r = htp_scan(KernelSpec.power(4), 2, 2, 100, seed=7, box=(0.1, 2))
    assert r.violations > 0 and r.min_det < 0


def test_scale_covariance_keeps_sign():
    for i in range(10):
        g = weyl_sample(2, 2, box=(0, 1), seed=9, index=i)
        scaled = EvaluationGrid((tuple(3.0 * x for x in g.vectors[0]),) + g.vectors[1:])
        assert hyperdet(kernel_array(KernelSpec.exp_product(4), scaled)) > 0
