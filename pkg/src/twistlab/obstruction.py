"""Quantities from the proof that ``Z_2(alpha) ~ Z_2(beta)`` forces ``alpha = beta``.

Throughout ``a = 1 + i*alpha`` and ``b = 1 + i*beta``; the twist parameter is
the imaginary part of the exponent.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy.optimize import minimize

from .errors import DomainError
from .scalar import Exponent, cpow


@dataclass(frozen=True)
class SigmaGrid:
    """Sorted values ``sigma = log(N) / 2``; ``ns`` records the integers when known."""

    values: tuple
    ns: tuple | None = None

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise DomainError("empty sigma grid")
        if any(not v > 0.0 for v in vals):
            raise DomainError("sigma values must be positive")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise DomainError("sigma values must be strictly increasing")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_integers(cls, ns) -> "SigmaGrid":
        ns = sorted({int(n) for n in ns})
        if ns and ns[0] < 2:
            raise DomainError("N must be at least 2 so that sigma > 0")
        return cls(tuple(0.5 * math.log(n) for n in ns), tuple(ns))

    @classmethod
    def geometric(cls, n_max: int, ratio: float = 2.0, n_min: int = 2) -> "SigmaGrid":
        """``N = ceil(ratio**k)`` from ``n_min`` up to ``n_max``, with ``n_max`` itself included."""
        if ratio <= 1.0:
            raise DomainError("ratio must exceed 1")
        n_max = int(n_max)
        if n_max < n_min:
            raise DomainError("n_max below n_min")
        ns, k = [], 0
        while True:
            n = math.ceil(ratio ** k) if ratio ** k < 2.0 ** 52 else int(mpmath.ceil(mpmath.mpf(ratio) ** k))
            if n > n_max:
                break
            if n >= n_min:
                ns.append(n)
            k += 1
        ns.append(n_max)
        return cls.from_integers(ns)

    @classmethod
    def from_sigmas(cls, sigmas) -> "SigmaGrid":
        return cls(tuple(sorted(set(float(s) for s in sigmas))))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.values)

    @property
    def sigma_min(self) -> float:
        return self.values[0]

    @property
    def sigma_max(self) -> float:
        return self.values[-1]

    def __len__(self) -> int:
        return len(self.values)

    def to_obj(self) -> dict:
        return {"sigma": list(self.values), "N": None if self.ns is None else [str(n) for n in self.ns]}


@dataclass(frozen=True)
class DiagonalParams:
    lam: complex
    mu: complex
    nu: complex

    def __post_init__(self):
        for name in ("lam", "mu", "nu"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        if self.lam == 0:
            raise DomainError("lambda must be nonzero")

    def conj(self) -> "DiagonalParams":
        return DiagonalParams(self.lam.conjugate(), self.mu.conjugate(), self.nu.conjugate())

    def to_obj(self) -> dict:
        return {k: [getattr(self, k).real, getattr(self, k).imag] for k in ("lam", "mu", "nu")}


def limit_quantity(alpha: float, kappa: float, sigma: float) -> complex:
    """``sigma**(i alpha) (kappa**a - 1) / (kappa - 1)``, the quotient
    ``((kappa sigma)**a - sigma**a) / (kappa sigma - sigma)`` in closed form."""
    if not kappa > 1.0:
        raise DomainError("kappa must exceed 1")
    if not sigma > 0.0:
        raise DomainError("sigma must be positive")
    ph = alpha * math.log(sigma)
    return complex(math.cos(ph), math.sin(ph)) * (cpow(kappa, alpha) - 1.0) / (kappa - 1.0)


def _limit_values(alpha: float, kappa: float, sigmas: np.ndarray) -> np.ndarray:
    ph = alpha * np.log(sigmas)
    c = (cpow(kappa, alpha) - 1.0) / (kappa - 1.0)
    return (np.cos(ph) + 1j * np.sin(ph)) * c


def diameter(z: np.ndarray) -> float:
    """Largest pairwise distance of complex points.

    Uses the convex hull and rotating calipers, so it costs ``O(n log n)``.
    """
    z = np.asarray(z, dtype=np.complex128)
    if z.size < 2:
        return 0.0
    pts = np.unique(np.column_stack([z.real, z.imag]), axis=0)
    if len(pts) < 2:
        return 0.0
    hull = _convex_hull(pts)
    if len(hull) == 2:
        return float(math.hypot(*(hull[0] - hull[1])))
    return _calipers(hull)


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _convex_hull(pts: np.ndarray) -> np.ndarray:
    # monotone chain; pts are sorted lexicographically by np.unique
    pl = [tuple(p) for p in pts]
    lower, upper = [], []
    for p in pl:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pl):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def _calipers(h: np.ndarray) -> float:
    n = len(h)
    best, j = 0.0, 1
    for i in range(n):
        ni = (i + 1) % n
        while abs(_cross(h[i], h[ni], h[(j + 1) % n])) > abs(_cross(h[i], h[ni], h[j])):
            j = (j + 1) % n
        for k in (i, ni):
            d = math.hypot(h[k][0] - h[j][0], h[k][1] - h[j][1])
            best = max(best, d)
    return best


@dataclass
class OscillationReport:
    alpha: float
    kappa: float
    sigma_range: tuple
    radius: float
    oscillation: float
    samples: int
    sigmas: np.ndarray = field(repr=False, default=None)
    values: np.ndarray = field(repr=False, default=None)

    def to_obj(self) -> dict:
        return {
            "alpha": self.alpha,
            "kappa": self.kappa,
            "sigma_range": list(self.sigma_range),
            "radius": self.radius,
            "oscillation": self.oscillation,
            "samples": self.samples,
        }

    def path_rows(self):
        for s, v in zip(self.sigmas, self.values):
            yield float(s), float(v.real), float(v.imag)


def oscillation(alpha: float, kappa: float, sigma_min: float, sigma_max: float,
                samples: int) -> OscillationReport:
    """Diameter of the limit quantity over a log-uniform sample of ``sigma``.

    The values lie on the circle of radius ``|kappa**a - 1| / (kappa - 1)``;
    for ``alpha != 0`` the phase ``alpha log sigma`` never settles, which is
    what keeps the limit from existing.
    """
    if not kappa > 1.0:
        raise DomainError("kappa must exceed 1")
    if not 0.0 < sigma_min < sigma_max:
        raise DomainError("need 0 < sigma_min < sigma_max")
    if samples < 2:
        raise DomainError("need at least 2 samples")
    sig = np.geomspace(sigma_min, sigma_max, samples)
    vals = _limit_values(alpha, kappa, sig)
    radius = abs(cpow(kappa, alpha) - 1.0) / (kappa - 1.0)
    osc = 0.0 if alpha == 0.0 else diameter(vals)
    return OscillationReport(float(alpha), float(kappa), (float(sigma_min), float(sigma_max)),
                             radius, osc, int(samples), sig, vals)


def _residual_values(alpha: float, beta: float, lam: complex, mu: complex, nu: complex,
                     sig: np.ndarray) -> np.ndarray:
    shifted = sig + math.log(abs(lam))
    if np.any(shifted <= 0.0):
        k = int(np.argmax(shifted <= 0.0))
        raise DomainError(f"sigma + log|lambda| <= 0 at grid point sigma = {sig[k]!r}")
    return nu * cpow(sig, alpha) - lam * cpow(shifted, beta) + mu


def diagonal_residual(alpha: float, beta: float, p: DiagonalParams, grid: SigmaGrid) -> float:
    """``max over the grid of |nu sigma**a - lam (sigma + log|lam|)**b + mu|``."""
    return float(np.abs(_residual_values(alpha, beta, p.lam, p.mu, p.nu, grid.array)).max())


# --- min-max fit ---------------------------------------------------------


@dataclass(frozen=True)
class FitConfig:
    restarts: int = 32
    max_evals: int = 10_000
    seed: int = 0
    workers: int = 1
    spread: float = 0.5


@dataclass
class FitReport:
    alpha: float
    beta: float
    grid: SigmaGrid
    best_params: DiagonalParams
    residual: float
    restarts: int
    iterations: int
    evaluations: int
    seed: int
    improved: bool
    best_restart: int
    restart_residuals: list

    def to_obj(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "grid": {"size": len(self.grid), "sigma_min": self.grid.sigma_min,
                     "sigma_max": self.grid.sigma_max},
            "best_params": self.best_params.to_obj(),
            "residual": self.residual,
            "restarts": self.restarts,
            "iterations": self.iterations,
            "evaluations": self.evaluations,
            "seed": self.seed,
            "improved": self.improved,
            "best_restart": self.best_restart,
            "restart_residuals": self.restart_residuals,
        }


class _Objective:
    """Residual in the coordinates ``(rho, theta, Re mu, Im mu, Re nu, Im nu)``.

    ``|lam| = exp(-sigma_min) + exp(rho)`` keeps every grid point feasible.
    """

    def __init__(self, alpha, beta, grid: SigmaGrid):
        self.alpha, self.beta = alpha, beta
        self.sig = grid.array
        self.floor = math.exp(-grid.sigma_min)
        self.sig_a = cpow(self.sig, alpha)

    def params(self, z) -> DiagonalParams:
        rho, theta, mr, mi, nr, ni = (float(v) for v in z)
        r = self.floor + math.exp(min(rho, 700.0))
        return DiagonalParams(complex(r * math.cos(theta), r * math.sin(theta)),
                              complex(mr, mi), complex(nr, ni))

    def coords(self, p: DiagonalParams) -> np.ndarray:
        r = abs(p.lam)
        if r <= self.floor:
            raise DomainError("lambda is infeasible for this grid")
        return np.array([math.log(r - self.floor), math.atan2(p.lam.imag, p.lam.real),
                         p.mu.real, p.mu.imag, p.nu.real, p.nu.imag])

    def __call__(self, z) -> float:
        p = self.params(z)
        shifted = self.sig + math.log(abs(p.lam))
        if np.any(shifted <= 0.0):  # exp(rho) underflowed relative to the floor
            return math.inf
        v = p.nu * self.sig_a - p.lam * cpow(shifted, self.beta) + p.mu
        return float(np.abs(v).max())


def _start_points(obj: _Objective, cfg: FitConfig) -> list:
    rng = np.random.default_rng(cfg.seed)
    centre = DiagonalParams(1.0, 0.0, 1.0)
    starts = [obj.coords(centre)]
    for k in range(1, cfg.restarts):
        if k % 2:
            # around (1, 0, 1)
            lam = 1.0 + cfg.spread * complex(*rng.standard_normal(2))
            if abs(lam) <= obj.floor * 1.01:
                lam = lam / abs(lam) * (obj.floor * 1.01 + abs(rng.standard_normal()) * cfg.spread)
            p = DiagonalParams(lam, cfg.spread * complex(*rng.standard_normal(2)),
                               1.0 + cfg.spread * complex(*rng.standard_normal(2)))
        else:
            # unimodular lam with random phase
            ph = complex(math.cos(t := rng.uniform(0, 2 * math.pi)), math.sin(t))
            lam = ph * max(1.0, obj.floor * 1.01)
            p = DiagonalParams(lam, cfg.spread * complex(*rng.standard_normal(2)),
                               ph * (1.0 + cfg.spread * complex(*rng.standard_normal(2))))
        starts.append(obj.coords(p))
    return starts


def _local_search(obj: _Objective, z0: np.ndarray, max_evals: int):
    """Nelder-Mead restarted from the incumbent until the budget is spent or it stops improving."""
    f0 = obj(z0)
    z, f = np.array(z0, dtype=float), f0
    evals, iters = 1, 0
    step = 0.5
    while evals < max_evals:
        simplex = np.vstack([z] + [z + step * e for e in np.eye(6)])
        res = minimize(obj, z, method="Nelder-Mead",
                       options={"maxfev": max_evals - evals, "initial_simplex": simplex,
                                "xatol": 1e-12, "fatol": 1e-14, "adaptive": True})
        evals += int(res.nfev)
        iters += int(res.nit)
        if res.fun < f * (1.0 - 1e-9):
            z, f = res.x, float(res.fun)
            step = max(step * 0.5, 1e-6)
        elif step > 1e-6:
            step *= 0.1
        else:
            break
    return z, f, f < f0, evals, iters


def diagonal_fit(alpha: float, beta: float, grid: SigmaGrid, config: FitConfig | None = None) -> FitReport:
    """Multi-start derivative-free minimization of :func:`diagonal_residual`.

    Restart ``k`` is fully determined by ``(config.seed, k)``; results are merged
    by ``(residual, restart index)``, so ``config.workers`` never changes the report.
    """
    cfg = config or FitConfig()
    if cfg.restarts < 1:
        raise DomainError("need at least one restart")
    obj = _Objective(float(alpha), float(beta), grid)
    starts = _start_points(obj, cfg)

    def run(z0):
        return _local_search(obj, z0, cfg.max_evals)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(z0) for z0 in starts]

    order = sorted(range(len(results)), key=lambda k: (results[k][1], k))
    k = order[0]
    z, f, _, _, _ = results[k]
    p = obj.params(z)
    return FitReport(
        alpha=float(alpha),
        beta=float(beta),
        grid=grid,
        best_params=p,
        residual=diagonal_residual(alpha, beta, p, grid),
        restarts=cfg.restarts,
        iterations=sum(r[4] for r in results),
        evaluations=sum(r[3] for r in results),
        seed=cfg.seed,
        improved=any(r[2] for r in results),
        best_restart=k,
        restart_residuals=[r[1] for r in results],
    )


# --- closed-form proof constants ----------------------------------------


def contradiction_witness(delta: float, beta: float) -> int:
    """Smallest ``N`` with ``delta**2 (log sqrt N)**2 > (1 + 2|b|)**2``.

    Equals ``floor(exp(2 (1 + 2|b|) / delta)) + 1``; returned as an exact integer.
    """
    if not delta > 0.0:
        raise DomainError("delta must be positive")
    if delta > 1.0:
        raise DomainError("delta must be at most 1")
    with mpmath.workprec(64):
        expo = 2 * (1 + 2 * mpmath.hypot(1, mpmath.mpf(beta))) / mpmath.mpf(delta)
        digits = int(expo / mpmath.log(10)) + 1
    with mpmath.workdps(digits + 30):
        x = mpmath.exp(2 * (1 + 2 * mpmath.hypot(1, mpmath.mpf(beta))) / mpmath.mpf(delta))
        return int(mpmath.floor(x)) + 1


def witness_inequality(N: int, delta: float, beta: float) -> bool:
    """Evaluate ``delta**2 (log sqrt N)**2 > (1 + 2|b|)**2`` in log space at high precision."""
    N = int(N)
    if N < 1:
        raise DomainError("N must be positive")
    digits = N.bit_length() * 0.30103
    with mpmath.workdps(int(digits) + 40):
        lhs = mpmath.mpf(delta) * mpmath.log(mpmath.mpf(N)) / 2
        rhs = 1 + 2 * mpmath.hypot(1, mpmath.mpf(beta))
        return bool(lhs > rhs)


def proof_bound_K(c: float, M: float, beta: float, sigma: float, tau: float) -> float:
    """``(|b| tau**2 / M + 4 + 4|b|) / (c (tau - sigma))``."""
    if not c > 0.0:
        raise DomainError("c must be positive")
    if not M > 0.0:
        raise DomainError("M must be positive")
    if not 0.0 <= sigma < tau:
        raise DomainError("need 0 <= sigma < tau")
    mb = Exponent(beta).modulus
    return (mb * tau * tau / M + 4.0 + 4.0 * mb) / (c * (tau - sigma))


def divided_difference(alpha: float, sigma: float, tau: float) -> complex:
    """``(tau**a - sigma**a) / (tau - sigma)``."""
    if not 0.0 < sigma < tau:
        raise DomainError("need 0 < sigma < tau")
    return (cpow(tau, alpha) - cpow(sigma, alpha)) / (tau - sigma)


def two_point_difference(alpha: float, sigma1: float, tau1: float, sigma2: float, tau2: float) -> float:
    """Distance between two divided-difference quotients of ``t -> t**a``."""
    return abs(divided_difference(alpha, sigma1, tau1) - divided_difference(alpha, sigma2, tau2))
