"""Local series solutions, obstruction polynomials and q-set extraction."""

import math

import numpy as np
import pytest
import scipy.integrate
import sympy as sp

from conftest import draw_terminating_params, multiset_gap
from fuchsia_heun.connection import HeunParameters, companion_system, heun_scalar
from fuchsia_heun.frobenius import (
    LogarithmicCaseError,
    PreconditionError,
    apparent_q_set,
    frobenius_terms,
    heun_operator_polys,
    is_apparent,
    local_series,
    polynomial_q_set,
)

SERIES_MATCH_TOL = 1e-12
INTEGRATION_MATCH_TOL = 1e-7


def _heun(a, q, alpha, gamma, delta, epsilon):
    """Fill beta from the second-order Fuchs relation."""
    beta = gamma + delta + epsilon - alpha - 1.0
    return HeunParameters(a=a, q=q, alpha=alpha, beta=beta,
                          gamma=gamma, delta=delta, epsilon=epsilon)


# --------------------------------------------------- exact-arithmetic oracle

def _oracle_coeffs_at_zero(a, q, al, be, ga, de, ep, n_terms):
    """Series coefficients at x = 0, exponent 0, solved with exact rationals.

    Fully independent of the recurrence bookkeeping under test: the unknown
    coefficients are solved from the collected powers of the expanded
    operator image.
    """
    x = sp.symbols("x")
    unknowns = [sp.symbols(f"c{k}") for k in range(1, n_terms)]
    y = 1 + sum(c * x ** (k + 1) for k, c in enumerate(unknowns))
    op = (x * (x - 1) * (x - a) * sp.diff(y, x, 2)
          + (ga * (x - 1) * (x - a) + de * x * (x - a) + ep * x * (x - 1))
          * sp.diff(y, x)
          + (al * be * x - q) * y)
    op = sp.expand(op)
    eqs = [sp.Eq(op.coeff(x, k), 0) for k in range(n_terms - 1)]
    sol = sp.solve(eqs, unknowns, dict=True)[0]
    return [sp.Integer(1)] + [sp.nsimplify(sol[c]) for c in unknowns]


def test_series_matches_exact_rational_oracle():
    a = sp.Integer(3)
    q = sp.Rational(2, 7)
    al, ga, de = sp.Rational(1, 3), sp.Rational(2, 5), sp.Rational(3, 7)
    ep = sp.Rational(5, 11)
    be = ga + de + ep - al - 1
    exact = _oracle_coeffs_at_zero(a, q, al, be, ga, de, ep, 9)
    h = HeunParameters(a=float(a), q=float(q), alpha=float(al), beta=float(be),
                       gamma=float(ga), delta=float(de), epsilon=float(ep))
    got = local_series(h, 0.0, 0.0, 8).coeffs
    assert len(got) == 9
    for s, (g, e) in enumerate(zip(got, exact)):
        e = complex(sp.nsimplify(e))
        assert abs(g - e) < SERIES_MATCH_TOL * max(1.0, abs(e)), f"index {s}"


def test_first_step_relation_at_zero():
    # a gamma c_1 = q c_0
    h = _heun(a=2.5, q=0.37, alpha=0.21, gamma=0.55, delta=0.4, epsilon=0.3)
    c = local_series(h, 0.0, 0.0, 2).coeffs
    assert abs(c[1] - h.q / (h.a * h.gamma)) < 1e-13


def test_epsilon_zero_reduction_gives_gauss_coefficients():
    # epsilon = 0 with q = a alpha beta turns the equation into the Gauss one;
    # coefficients become the hypergeometric Pochhammer ratios.
    h0 = _heun(a=2.0, q=0.0, alpha=0.3, gamma=0.6, delta=0.7, epsilon=0.0)
    h = HeunParameters(a=h0.a, q=h0.a * h0.alpha * h0.beta, alpha=h0.alpha,
                       beta=h0.beta, gamma=h0.gamma, delta=h0.delta,
                       epsilon=0.0)
    c = local_series(h, 0.0, 0.0, 10).coeffs
    num_a, num_b, den_c, fact = 1.0 + 0j, 1.0 + 0j, 1.0 + 0j, 1.0
    for n in range(10):
        expected = num_a * num_b / (den_c * fact)
        assert abs(c[n] - expected) < 1e-12 * max(1.0, abs(expected))
        num_a *= h.alpha + n
        num_b *= h.beta + n
        den_c *= h.gamma + n
        fact *= n + 1


def test_polynomial_verdict_confirms_gauss_classification():
    # alpha = -2 with the Gauss reduction q = a alpha beta: the terminating
    # q belongs to the degree-2 polynomial q-set.
    h0 = _heun(a=2.0, q=0.0, alpha=-2.0, gamma=0.6, delta=0.7, epsilon=0.0)
    expected_q = h0.a * h0.alpha * h0.beta
    roots = polynomial_q_set(h0)
    assert len(roots) == 3
    assert min(abs(r - expected_q) for r in roots) < 1e-8
    h = HeunParameters(a=h0.a, q=expected_q, alpha=h0.alpha, beta=h0.beta,
                       gamma=h0.gamma, delta=h0.delta, epsilon=0.0)
    c = local_series(h, 0.0, 0.0, 8).coeffs
    assert max(abs(v) for v in c[3:]) < 1e-10 * max(abs(v) for v in c[:3])


def test_series_matches_independent_integration():
    h = _heun(a=2.2 + 0.8j, q=0.4 - 0.2j, alpha=0.35, gamma=0.62,
              delta=0.47, epsilon=0.3 + 0.1j)
    ls = local_series(h, 0.0, 0.0, 80)
    direction = complex(math.cos(0.4), math.sin(0.4))
    x0 = 0.04 * direction
    x1 = 0.3 * abs(h.a) * direction
    system = companion_system(heun_scalar(h))

    def rhs(t, yr):
        z = x0 + t * (x1 - x0)
        y = yr[:2] + 1j * yr[2:]
        m = np.asarray(system.matrix(z))
        dy = (x1 - x0) * (m @ y)
        return np.concatenate([dy.real, dy.imag])

    y_start = np.array([ls(x0), ls.derivative(x0)])
    sol = scipy.integrate.solve_ivp(
        rhs, (0.0, 1.0), np.concatenate([y_start.real, y_start.imag]),
        rtol=1e-12, atol=1e-12, dense_output=False)
    assert sol.success
    val = sol.y[0, -1] + 1j * sol.y[2, -1]
    ref = ls(x1)
    assert abs(val - ref) < INTEGRATION_MATCH_TOL * max(1.0, abs(ref))


# ------------------------------------------------------------ local exponents

def test_local_series_rejects_wrong_exponent():
    h = _heun(a=3.0, q=0.1, alpha=0.3, gamma=0.5, delta=0.4, epsilon=0.25)
    with pytest.raises(PreconditionError):
        local_series(h, 0.0, 0.37, 5)
    with pytest.raises(PreconditionError):
        local_series(h, 0.7, 0.0, 5)      # not a singular point


def test_second_exponent_at_each_point():
    h = _heun(a=3.0, q=0.1, alpha=0.3, gamma=0.45, delta=0.35, epsilon=0.55)
    for point, rho in ((0.0, 1.0 - h.gamma), (1.0, 1.0 - h.delta),
                       (h.a, 1.0 - h.epsilon)):
        ls = local_series(h, point, rho, 6)
        assert abs(ls.exponent - rho) < 1e-12
        assert abs(ls.coeffs[0] - 1.0) < 1e-14


def test_radius_hint_is_distance_to_nearest_other_point():
    h = _heun(a=3.0, q=0.1, alpha=0.3, gamma=0.45, delta=0.35, epsilon=0.55)
    assert local_series(h, 0.0, 0.0, 4).radius_hint == pytest.approx(1.0)
    assert local_series(h, 3.0, 0.0, 4).radius_hint == pytest.approx(2.0)


def test_wronskian_of_the_two_local_solutions():
    h = _heun(a=3.0, q=0.1, alpha=0.3, gamma=0.45, delta=0.35, epsilon=0.55)
    y1 = local_series(h, 0.0, 0.0, 40)
    y2 = local_series(h, 0.0, 1.0 - h.gamma, 40)
    for x in (0.1, 0.2 + 0.1j):
        w = y1(x) * y2.derivative(x) - y1.derivative(x) * y2(x)
        assert abs(w) > 1e-6


def test_logarithmic_resonance_detected():
    # epsilon = -1 makes the exponents at a equal {0, 2}; a generic q leaves
    # a non-vanishing obstruction at index 2, so the exponent-0 series must
    # refuse rather than silently drop the logarithm.
    h = _heun(a=2.0, q=0.31, alpha=0.4, gamma=0.55, delta=0.6, epsilon=-1.0)
    qs = apparent_q_set(h)
    assert min(abs(h.q - r) for r in qs) > 1e-3      # q really is generic
    with pytest.raises(LogarithmicCaseError) as err:
        local_series(h, h.a, 0.0, 6)
    assert err.value.index == 2
    good = HeunParameters(a=h.a, q=qs[0], alpha=h.alpha, beta=h.beta,
                          gamma=h.gamma, delta=h.delta, epsilon=h.epsilon)
    local_series(good, good.a, 0.0, 6)               # must not raise


# ------------------------------------------------------------------- q sets

def test_polynomial_q_set_degree_zero():
    h = _heun(a=2.0, q=0.0, alpha=0.0, gamma=0.5, delta=0.4, epsilon=0.35)
    roots = polynomial_q_set(h)
    assert len(roots) == 1
    assert abs(roots[0]) < 1e-12


def test_polynomial_q_set_degree_one_terminates_series():
    h = _heun(a=2.0, q=0.0, alpha=-1.0, gamma=0.5, delta=0.45, epsilon=0.4)
    roots = polynomial_q_set(h)
    assert len(roots) == 2
    for r in roots:
        hr = HeunParameters(a=h.a, q=r, alpha=h.alpha, beta=h.beta,
                            gamma=h.gamma, delta=h.delta, epsilon=h.epsilon)
        c = local_series(hr, 0.0, 0.0, 6).coeffs
        head = max(abs(v) for v in c[:2])
        assert max(abs(v) for v in c[2:]) < 1e-10 * head


def test_polynomial_q_set_degree_three_operator_residual():
    h = _heun(a=1.7 + 0.6j, q=0.0, alpha=-3.0, gamma=0.52, delta=0.61,
              epsilon=0.44)
    roots = polynomial_q_set(h)
    assert len(roots) == 4
    p2, p1, p0_base = heun_operator_polys(h)
    for r in roots:
        hr = HeunParameters(a=h.a, q=r, alpha=h.alpha, beta=h.beta,
                            gamma=h.gamma, delta=h.delta, epsilon=h.epsilon)
        c = local_series(hr, 0.0, 0.0, 4).coeffs
        for k in range(20):
            x = 0.8 * np.exp(2j * np.pi * k / 20)
            y = sum(c[s] * x ** s for s in range(4))
            dy = sum(s * c[s] * x ** (s - 1) for s in range(1, 4))
            d2y = sum(s * (s - 1) * c[s] * x ** (s - 2) for s in range(2, 4))
            resid = p2(x) * d2y + p1(x) * dy + (h.alpha * h.beta * x - r) * y
            scale = max(abs(p2(x) * d2y), abs(p1(x) * dy), abs(y), 1.0)
            assert abs(resid) < 1e-9 * scale


def test_apparent_q_set_m_zero_single_root():
    h = _heun(a=2.5, q=0.0, alpha=0.27, gamma=0.5, delta=0.45, epsilon=0.0)
    roots = apparent_q_set(h)
    assert len(roots) == 1
    assert abs(roots[0] - h.a * h.alpha * h.beta) < 1e-10


def test_apparent_q_set_sizes_and_sorting():
    rng = np.random.default_rng(71)
    for m in (1, 2, 3):
        h = draw_terminating_params(rng, m)
        roots = apparent_q_set(h)
        assert len(roots) == m + 1
        keys = [(round(r.real, 10), round(r.imag, 10)) for r in roots]
        assert keys == sorted(keys)


def test_is_apparent_accepts_roots_rejects_perturbations():
    h = _heun(a=2.0, q=0.0, alpha=0.4, gamma=0.55, delta=0.6, epsilon=-1.0)
    for r in apparent_q_set(h):
        assert is_apparent(HeunParameters(
            a=h.a, q=r, alpha=h.alpha, beta=h.beta, gamma=h.gamma,
            delta=h.delta, epsilon=h.epsilon), r)
        assert not is_apparent(HeunParameters(
            a=h.a, q=r + 0.1, alpha=h.alpha, beta=h.beta, gamma=h.gamma,
            delta=h.delta, epsilon=h.epsilon), r + 0.1)


def test_is_apparent_requires_positive_integer_exponent_gap():
    h = _heun(a=2.0, q=0.2, alpha=0.4, gamma=0.55, delta=0.6, epsilon=0.3)
    assert not is_apparent(h, h.q)


def test_frobenius_terms_validate_point():
    h = _heun(a=3.0, q=0.1, alpha=0.3, gamma=0.5, delta=0.4, epsilon=0.25)
    with pytest.raises(PreconditionError):
        frobenius_terms(h, 0.5)
    f1, f2, f3 = frobenius_terms(h, 0.0)
    # indicial polynomial at 0: rho (rho - 1 + gamma) up to normalisation
    for rho in (0.0, 1.0 - h.gamma):
        assert abs(f1(rho)) < 1e-12
