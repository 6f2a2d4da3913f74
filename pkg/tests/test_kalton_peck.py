import cmath
import math

import numpy as np
import pytest

from twistlab import kalton_peck as kp, seq
from twistlab.errors import DomainError
from twistlab.scalar import cpow
from twistlab.seq import FiniteVector, Permutation

from conftest import random_vector

# 40-digit mpmath evaluations
OMEGA_12 = (0.80471895621705018730, 0.22314355131420975577)
OMEGA_PRIME_HALF_B1 = complex(0.32355509303964734980, -0.12419885364871731884)


def test_twist_parameter():
    p = kp.TwistParameter(2.0)
    assert p.a == 1 + 2j and p.lipschitz == math.sqrt(5)
    assert (-p).alpha == -2.0


def test_omega_basis_is_empty():
    for n in (1, 7, 10**9):
        assert kp.omega(1.3, FiniteVector.basis(n)) == FiniteVector()
        assert kp.omega(0.0, seq.scale(FiniteVector.basis(n), 3 - 4j)) == FiniteVector()
    assert kp.omega(1.0, FiniteVector()) == FiniteVector()


@pytest.mark.parametrize("n", [2, 3, 10, 1000])
@pytest.mark.parametrize("alpha", [0.0, -0.5, 3.0])
def test_omega_indicator(n, alpha):
    w = kp.omega(alpha, seq.indicator(range(1, n + 1)))
    expect = cpow(0.5 * math.log(n), alpha)
    assert len(w) == n
    assert np.allclose(w.values, expect, rtol=1e-14, atol=0)


def test_omega_two_coordinates():
    w = kp.omega(0.0, FiniteVector.dense([1, 2]))
    assert math.isclose(w[1].real, OMEGA_12[0], rel_tol=1e-14) and w[1].imag == 0
    assert math.isclose(w[2].real, OMEGA_12[1], rel_tol=1e-13) and w[2].imag == 0


def test_omega_homogeneous(rng):
    for _ in range(50):
        x = random_vector(rng, int(rng.integers(1, 200)))
        lam = complex(*rng.standard_normal(2)) * 10 ** rng.uniform(-5, 5)
        lhs = kp.omega(1.7, seq.scale(x, lam))
        rhs = seq.scale(kp.omega(1.7, x), lam)
        assert seq.l2_norm(lhs - rhs) <= 1e-12 * seq.l2_norm(rhs) + 1e-300


def test_omega_zero_convention(rng):
    x = FiniteVector([2, 9, 40], [1.0, 1e-200, -3j])
    w = kp.omega(2.0, x)
    assert set(int(i) for i in w.indices) <= {2, 9, 40}
    assert not np.any(w.values == 0)


def test_quasi_norm_examples(rng):
    y = random_vector(rng, 20)
    assert kp.quasi_norm(1.0, kp.TwistedVector(FiniteVector(), y)) == seq.l2_norm(y)
    x = random_vector(rng, 30)
    assert kp.quasi_norm(2.0, kp.TwistedVector(x, kp.omega(2.0, x))) == seq.l2_norm(x)
    assert kp.quasi_norm(2.0, kp.TwistedVector()) == 0.0


@pytest.mark.parametrize("n", [1, 2, 4, 10, 1000])
def test_indicator_identity(n):
    sigma = 0.5 * math.log(n)
    for alpha in (0.0, 1.0, -0.5):
        v = kp.TwistedVector(seq.indicator(range(1, n + 1)),
                             seq.scale(seq.indicator(range(1, n + 1)), cpow(sigma, alpha)))
        assert abs(kp.quasi_norm(alpha, v) - math.sqrt(n)) <= 1e-12 * math.sqrt(n)


def test_omega_prime_examples():
    assert kp.omega_prime(1.0, FiniteVector.basis(1)) == FiniteVector()
    w = kp.omega_prime(1.0, FiniteVector([1], [0.5]))
    assert cmath.isclose(w[1], OMEGA_PRIME_HALF_B1, rel_tol=1e-14)
    with pytest.raises(DomainError):
        kp.omega_prime(0.0, FiniteVector.dense([1.5, 0.1]))


def test_omega_prime_equals_omega_on_unit_sphere():
    w = FiniteVector.dense([0.5, -0.5j, 0.5, 0.5 * cmath.exp(0.3j)])
    assert seq.l2_norm(w) == 1.0
    assert kp.omega_prime(0.8, w) == kp.omega(0.8, w)


def test_omega_gap_examples(rng):
    g = kp.omega_gap(2.0, FiniteVector.dense([0.5, 0.5, 0.5, 0.5]))
    assert g.gap == 0.0 and g.holds
    g = kp.omega_gap(0.0, FiniteVector([1], [0.5]))
    assert math.isclose(g.gap, 0.5 * math.log(2), rel_tol=1e-15)
    assert math.isclose(g.bound, 0.5 * math.log(2), rel_tol=1e-15)
    assert g.holds


def test_omega_gap_equality_family():
    for c in np.linspace(math.exp(-1), 1.0, 25):
        g = kp.omega_gap(0.0, FiniteVector([3], [c * cmath.exp(1j * c)]))
        assert abs(g.gap - g.bound) <= 1e-12 * max(g.bound, 1e-300) or g.bound == g.gap


def test_omega_gap_random(rng):
    for _ in range(1000):
        d = int(rng.integers(1, 64))
        w = random_vector(rng, d, width=rng.uniform(0, 20))
        w = seq.scale(w, rng.random() / seq.l2_norm(w))
        beta = rng.uniform(-5, 5)
        g = kp.omega_gap(beta, w)
        assert g.holds
        assert g.gap <= math.hypot(1, beta) + 1e-12  # the unit-ball corollary


def test_centralizer_defect_trivial(rng):
    x = random_vector(rng, 40)
    assert kp.centralizer_defect(1.0, 1, x) == 0.0
    d = kp.centralizer_defect(1.0, cmath.exp(0.7j), x)
    assert d <= 1e-14
    with pytest.raises(DomainError):
        kp.centralizer_defect(1.0, 1.5, x)
    with pytest.raises(DomainError):
        kp.centralizer_defect(1.0, 0.5, FiniteVector())


@pytest.mark.parametrize("n,k", [(10, 1), (100, 14), (512, 69), (7, 7)])
def test_centralizer_defect_mask_closed_form(n, k):
    # x flat on n coordinates, s the indicator of k of them, alpha = 0:
    # each surviving coordinate shifts by x_j log r with r = sqrt(k/n)
    x = seq.indicator(range(1, n + 1))
    s = seq.indicator(range(1, k + 1))
    r = math.sqrt(k / n)
    assert math.isclose(kp.centralizer_defect(0.0, s, x), r * abs(math.log(r)), rel_tol=1e-12, abs_tol=1e-15)


def test_centralizer_bound_brute_force(rng):
    # direct sampling, independent of centralizer_search, supports 2L/e
    for alpha in (0.0, 1.0, 3.0):
        bound = kp.centralizer_bound(alpha)
        worst = 0.0
        for _ in range(2000):
            d = int(rng.integers(1, 64))
            x = random_vector(rng, d, width=rng.uniform(0, 20))
            s = FiniteVector.dense(np.exp(-rng.uniform(0, 20) * rng.random(d)) * np.exp(2j * np.pi * rng.random(d)))
            worst = max(worst, kp.centralizer_defect(alpha, s, x))
        assert worst <= bound
        # the sharper sqrt(2) L / e from splitting the log difference
        assert worst <= math.sqrt(2) * kp.TwistParameter(alpha).lipschitz / math.e + 1e-12


def test_centralizer_search_matches_public_defect():
    r = kp.centralizer_search(1.0, samples=2000, max_dim=64, seed=3)
    d = kp.centralizer_defect(1.0, r.arg_max["s"], r.arg_max["x"])
    assert math.isclose(d, r.sup_ratio, rel_tol=1e-12)
    assert r.sup_ratio <= r.bound


def test_search_independent_of_workers():
    a = kp.centralizer_search(0.5, samples=3000, max_dim=64, seed=9, workers=1)
    b = kp.centralizer_search(0.5, samples=3000, max_dim=64, seed=9, workers=4)
    assert a.to_obj() == b.to_obj()


def test_quasilinearity_trivial(rng):
    x = random_vector(rng, 30)
    assert kp.quasilinearity_defect(1.0, x, FiniteVector()) == 0.0
    assert kp.quasilinearity_defect(1.0, x, x) <= 1e-14
    with pytest.raises(DomainError):
        kp.quasilinearity_defect(1.0, FiniteVector(), FiniteVector())


@pytest.mark.parametrize("t", [0.3, 1.0, 4.0])
def test_quasilinearity_two_basis_vectors(t):
    # Omega(e1) = Omega(t e2) = 0, so the defect is ||Omega(e1 + t e2)|| / (1 + t)
    r = math.hypot(1, t)
    expect = math.hypot(math.log(r), t * math.log(r / t)) / (1 + t)
    d = kp.quasilinearity_defect(0.0, FiniteVector.basis(1), FiniteVector([2], [t]))
    assert math.isclose(d, expect, rel_tol=1e-14)


def _grid_oracle_dim2(alpha):
    # x1 = e1, x2 = (u, v) real on a coarse grid; exhaustive
    best = 0.0
    for u in np.linspace(-3, 3, 41):
        for v in np.linspace(-3, 3, 41):
            x2 = FiniteVector.dense([u, v])
            best = max(best, kp.quasilinearity_defect(alpha, FiniteVector.basis(1), x2))
    return best


@pytest.mark.slow
def test_quasilinearity_stability():
    alpha = 1.0
    sups = {d: kp.quasilinearity_search(alpha, d, samples=4000, seed=2).sup_ratio for d in (2, 16, 256)}
    assert sups[256] / sups[2] <= 4
    oracle = _grid_oracle_dim2(alpha)
    # the random search at dim 2 reaches the coarse exhaustive value
    assert sups[2] >= 0.9 * oracle


def test_conjugate_transport_examples(rng):
    x, y = random_vector(rng, 25), random_vector(rng, 25)
    v = kp.TwistedVector(x, y)
    assert kp.quasi_norm(0.0, kp.conjugate_transport(v)) == kp.quasi_norm(0.0, v)
    n, alpha = 10, 1.5
    sigma = 0.5 * math.log(n)
    xi = seq.indicator(range(1, n + 1))
    img = kp.conjugate_transport(kp.TwistedVector(xi, seq.scale(xi, cpow(sigma, alpha))))
    assert img.x == xi
    assert np.allclose(img.y.values, cpow(sigma, -alpha), rtol=1e-15, atol=0)
    assert math.isclose(kp.quasi_norm(-alpha, img), math.sqrt(n), rel_tol=1e-12)
    assert kp.conjugate_transport(img) == kp.TwistedVector(xi, seq.scale(xi, cpow(sigma, alpha)))


def test_conjugate_transport_isometry(rng):
    for _ in range(500):
        v = kp.TwistedVector(random_vector(rng, 40), random_vector(rng, 40))
        q = kp.quasi_norm(1.5, v)
        assert abs(kp.quasi_norm(-1.5, kp.conjugate_transport(v)) - q) <= 1e-12 * q


def test_multiplier_boundedness(rng):
    v = kp.TwistedVector(random_vector(rng, 20), random_vector(rng, 20))
    assert kp.multiplier_boundedness(1.0, 1, v) == 1.0
    assert kp.multiplier_boundedness(1.0, 0, v) == 0.0
    with pytest.raises(DomainError):
        kp.multiplier_boundedness(1.0, 0.5, kp.TwistedVector())
    r = kp.multiplier_search(1.0, samples=3000, max_dim=512, seed=4)
    assert r.sup_ratio <= 1 + kp.centralizer_bound(1.0) + 1e-6
    check = kp.multiplier_boundedness(1.0, r.arg_max["s"], kp.TwistedVector(r.arg_max["x"], r.arg_max["y"]))
    assert math.isclose(check, r.sup_ratio, rel_tol=1e-10)


def test_permutation_symmetry(rng):
    for _ in range(200):
        x, y = random_vector(rng, 60, sparse=True), random_vector(rng, 60, sparse=True)
        n = max(x.support_max, y.support_max)
        pi = Permutation.random(n, rng)
        v = kp.TwistedVector(x, y)
        vp = kp.TwistedVector(seq.permute(x, pi), seq.permute(y, pi))
        q = kp.quasi_norm(2.0, v)
        assert abs(kp.quasi_norm(2.0, vp) - q) <= 1e-12 * q


def test_twisted_serialization(rng):
    v = kp.TwistedVector(random_vector(rng, 5), random_vector(rng, 3, sparse=True))
    obj = kp.twisted_to_obj(0.25, v)
    assert set(obj) == {"alpha", "x", "y"}
    alpha, back = kp.twisted_from_obj(obj)
    assert alpha.alpha == 0.25 and back == v


def test_defect_report_fields():
    r = kp.quasilinearity_search(0.0, 4, samples=100, seed=1)
    obj = r.to_obj()
    assert {"alpha", "dim", "samples", "seed", "sup_ratio", "arg_max"} <= set(obj)
    assert set(obj["arg_max"]) == {"x1", "x2"}
