import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twistlab import scalar
from twistlab.errors import DomainError, PowerOverflowError
from twistlab.scalar import Exponent, cpow

# 40-digit mpmath evaluations
CPOW_E_1PI = complex(1.468693939915885157, 2.287355287178842391)
ABS_2_1PI_MINUS_1 = 1.386738762184179913
TAYLOR_LHS_2_1 = 0.538742687963079256

betas = st.floats(min_value=-10, max_value=10, allow_nan=False)
ts = st.floats(min_value=1e-6, max_value=1e6, allow_nan=False)


def test_cpow_examples():
    assert cpow(1.0, Exponent(3.7)) == 1
    assert cpow(0.0, Exponent(2.0)) == 0
    assert cmath.isclose(cpow(math.e, Exponent(1.0)), CPOW_E_1PI, rel_tol=1e-15)


def test_cpow_errors():
    with pytest.raises(DomainError):
        cpow(-1.0, 1.0)
    with pytest.raises(PowerOverflowError):
        cpow(math.exp(701.0), 1.0)
    with pytest.raises(DomainError):
        cpow(np.array([1.0, -2.0]), 1.0)
    cpow(math.exp(700.0), 1.0)


def test_cpow_vectorized_matches_scalar():
    t = np.array([0.0, 0.5, 1.0, 3.0, 1e5])
    v = cpow(t, 2.5)
    assert v[0] == 0
    for ti, vi in zip(t, v):
        assert cmath.isclose(vi, cpow(float(ti), 2.5), rel_tol=1e-15, abs_tol=0)


def test_lipschitz_bound():
    assert scalar.lipschitz_bound(0.0) == 1.0
    assert scalar.lipschitz_bound(1.0) == math.sqrt(2)
    assert scalar.lipschitz_bound(2.0) == math.sqrt(5)


@settings(max_examples=500, deadline=None)
@given(ts, betas)
def test_cpow_modulus(t, beta):
    assert abs(abs(cpow(t, beta)) - t) <= 1e-12 * t


@settings(max_examples=500, deadline=None)
@given(ts, betas)
def test_cpow_conjugation_symmetry(t, beta):
    v, w = cpow(t, beta), cpow(t, Exponent(beta).conj())
    assert abs(w.real - v.real) <= 1e-15 * max(1.0, abs(v)) and abs(w.imag + v.imag) <= 1e-15 * max(1.0, abs(v))


@settings(max_examples=300, deadline=None)
@given(ts)
def test_cpow_real_case(t):
    assert abs(cpow(t, 0.0) - t) <= 1e-14 * t


def test_lower_upper_examples():
    r = scalar.check_lower(2.0, 1.0, 1.0)
    assert r.holds and r.rhs == 1.0
    assert math.isclose(r.lhs, ABS_2_1PI_MINUS_1, rel_tol=1e-14)
    r = scalar.check_lower(1.0, 0.0, 5.0)
    assert r.holds and r.lhs == 1.0 and r.rhs == 1.0
    r = scalar.check_upper(2.0, 1.0, 1.0)
    assert r.holds and math.isclose(r.rhs, math.sqrt(2), rel_tol=1e-15)
    assert math.isclose(r.lhs, ABS_2_1PI_MINUS_1, rel_tol=1e-14)
    r = scalar.check_upper(7.5, 2.25, 0.0)
    assert r.lhs == r.rhs


def test_precondition_errors():
    with pytest.raises(DomainError):
        scalar.check_lower(1.0, 1.0, 0.0)
    with pytest.raises(DomainError):
        scalar.check_upper(1.0, -0.5, 0.0)
    with pytest.raises(DomainError):
        scalar.check_taylor(1.0, 0.0, 0.0)
    with pytest.raises(DomainError):
        scalar.check_taylor_sharp(1.0, 0.0, 0.0)


def test_taylor_at_two_one():
    r = scalar.check_taylor(2.0, 1.0, 1.0)
    assert math.isclose(r.lhs, TAYLOR_LHS_2_1, rel_tol=1e-13)
    assert r.rhs == 0.5 * math.sqrt(2) and r.holds


def test_taylor_near_diagonal_for_unit_beta():
    # |beta| = 1: the stated constant is the sharp one, ratio -> 1 from below
    s = 3.0
    for eps in (1e-3, 1e-4):
        r = scalar.check_taylor(s * (1 + eps), s, 1.0)
        assert r.holds
        assert 0.9 < r.lhs / r.rhs <= 1.0


def test_taylor_second_order_limit():
    # oracle: remainder / (t - s)^2 -> |f''(s)| / 2 = |b||beta| / (2 s), series evaluation
    s, beta, eps = 2.0, 0.6, 1e-4
    b = complex(1.0, beta)
    h = s * eps
    f2 = b * (b - 1) * cpow(s, beta) / s ** 2
    f3 = b * (b - 1) * (b - 2) * cpow(s, beta) / s ** 3
    series = abs(f2 * h ** 2 / 2 + f3 * h ** 3 / 6)
    rem = scalar.taylor_remainder(s + h, s, beta)
    assert math.isclose(rem, series, rel_tol=1e-5)
    limit = abs(b) * abs(beta) / (2 * s)
    assert math.isclose(rem / h ** 2, limit, rel_tol=1e-3)
    assert limit <= abs(b) / (2 * s)


def test_modulus_taylor_constant_fails_for_large_beta():
    # second derivative has modulus |b||beta|/s, so the ratio tends to |beta| > 1
    r = scalar.check_taylor(1.001, 1.0, 2.0)
    assert not r.holds
    assert 1.9 < r.lhs / r.rhs < 2.0


def test_sharp_taylor_holds_near_diagonal_for_large_beta():
    for beta in (-9.0, 2.0, 10.0):
        r = scalar.check_taylor_sharp(1.0 + 1e-3, 1.0, beta)
        assert r.holds and r.lhs / r.rhs > 0.98


def test_sharp_taylor_sweep():
    sw = scalar.sweep_bounds(100_000, seed=11, checks=("lower", "upper", "taylor_sharp"))
    assert sw.violations() == {"lower": 0, "upper": 0, "taylor_sharp": 0}


def test_sweep_small_beta_has_no_violations():
    sw = scalar.sweep_bounds(100_000, seed=5, beta_max=1.0)
    assert sw.violations() == {"lower": 0, "upper": 0, "taylor": 0}


def test_sweep_matches_scalar_checks():
    sw = scalar.sweep_bounds(300, seed=3, checks=("lower", "upper", "taylor", "taylor_sharp"))
    for i in range(300):
        t, s, beta = sw.t[i], sw.s[i], sw.beta[i]
        for name in ("lower", "upper", "taylor", "taylor_sharp"):
            r = scalar.CHECKS[name](t, s, beta)
            assert r.holds == bool(sw.holds[name][i])
            assert math.isclose(r.lhs, sw.lhs[name][i], rel_tol=1e-9, abs_tol=1e-12 * t)


def test_sweep_csv():
    sw = scalar.sweep_bounds(5, seed=0)
    lines = sw.to_csv("upper").splitlines()
    assert lines[0] == "t,s,beta,lhs,rhs,holds"
    assert len(lines) == 6 and lines[1].endswith("true")


def test_sample_pairs_domain():
    t, s, beta = scalar.sample_pairs(10_000, seed=1)
    assert np.all(t > s) and np.all(s > 0) and np.all(t <= 1e3)
    assert np.all(np.abs(beta) <= 10)
