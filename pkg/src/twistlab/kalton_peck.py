"""The Kalton-Peck centralizer on finitely supported sequences.

For ``f(t) = t**(1 + i*alpha)`` the map is

    Omega(x)(n) = x(n) * f(log(||x||_2 / |x(n)|)),

and ``Z_2(alpha)`` is the space of pairs ``(x, y)`` with quasi-norm
``||x||_2 + ||y - Omega(x)||_2``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Union

import numpy as np

from . import seq
from .errors import DomainError
from .scalar import Exponent, cpow
from .seq import FiniteVector, Multiplier

INV_E = math.exp(-1.0)
# rounding slack for unimodular multipliers such as exp(i theta)
SUP_SLACK = 1e-15


@dataclass(frozen=True)
class TwistParameter:
    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha))
        if not math.isfinite(self.alpha):
            raise DomainError("alpha must be finite")

    @property
    def a(self) -> complex:
        return complex(1.0, self.alpha)

    @property
    def exponent(self) -> Exponent:
        return Exponent(self.alpha)

    @property
    def lipschitz(self) -> float:
        return math.hypot(1.0, self.alpha)

    def __neg__(self) -> "TwistParameter":
        return TwistParameter(-self.alpha)


TwistLike = Union[TwistParameter, float, int]


def as_twist(alpha: TwistLike) -> TwistParameter:
    return alpha if isinstance(alpha, TwistParameter) else TwistParameter(alpha)


@dataclass(frozen=True)
class TwistedVector:
    x: FiniteVector = field(default_factory=FiniteVector)
    y: FiniteVector = field(default_factory=FiniteVector)


def _omega_values(values: np.ndarray, norm: float, alpha: float) -> np.ndarray:
    if values.size == 0:
        return values.astype(np.complex128)
    mod = np.abs(values)
    u = math.log(norm) - np.log(mod)
    # can only dip below 0 by rounding, and only for a single coordinate
    np.maximum(u, 0.0, out=u)
    return values * cpow(u, alpha)


def omega(alpha: TwistLike, x: FiniteVector) -> FiniteVector:
    """The centralizer ``Omega_alpha(x)``; coordinates where ``x`` vanishes stay absent."""
    alpha = as_twist(alpha).alpha
    if not x:
        return FiniteVector()
    vals = _omega_values(x.values, seq.l2_norm(x), alpha)
    return FiniteVector._canonical(x.indices, vals)


def quasi_norm(alpha: TwistLike, v: TwistedVector) -> float:
    alpha = as_twist(alpha).alpha
    nx = seq.l2_norm(v.x)
    if nx == 0.0:
        return seq.l2_norm(v.y)
    om = FiniteVector._canonical(v.x.indices, _omega_values(v.x.values, nx, alpha))
    return nx + seq.l2_norm(seq.subtract(v.y, om))


def omega_prime(beta: TwistLike, w: FiniteVector) -> FiniteVector:
    """``w(n) * (log 1/|w(n)|)**b``, defined here only when every ``|w(n)| <= 1``."""
    beta = as_twist(beta).alpha
    if not w:
        return FiniteVector()
    mod = np.abs(w.values)
    if np.any(mod > 1.0):
        bad = int(w.indices[np.argmax(mod > 1.0)])
        raise DomainError(f"|w({bad})| > 1: log(1/|w|) is negative and the power is undefined")
    return FiniteVector._canonical(w.indices, w.values * cpow(-np.log(mod), beta))


class GapCheck(NamedTuple):
    gap: float
    bound: float
    holds: bool


def omega_gap(beta: TwistLike, w: FiniteVector, tol: float = 1e-12) -> GapCheck:
    """Compare ``||Omega(w) - Omega'(w)||_2`` with ``|b| |log ||w||_2| ||w||_2``."""
    beta = as_twist(beta)
    diff = seq.subtract(omega(beta, w), omega_prime(beta, w))
    gap = seq.l2_norm(diff)
    nw = seq.l2_norm(w)
    bound = beta.lipschitz * abs(math.log(nw)) * nw if nw > 0 else 0.0
    return GapCheck(gap, bound, gap <= bound + tol * max(bound, nw))


def centralizer_defect(alpha: TwistLike, s: Multiplier, x: FiniteVector) -> float:
    """``||Omega(sx) - s Omega(x)||_2 / ||x||_2`` for ``||s||_inf <= 1``."""
    if seq.multiplier_sup(s) > 1.0 + SUP_SLACK:
        raise DomainError("multiplier must satisfy ||s||_inf <= 1")
    if not x:
        raise DomainError("x must be nonzero")
    lhs = seq.subtract(omega(alpha, seq.multiply(s, x)), seq.multiply(s, omega(alpha, x)))
    return seq.l2_norm(lhs) / seq.l2_norm(x)


def quasilinearity_defect(alpha: TwistLike, x1: FiniteVector, x2: FiniteVector) -> float:
    if not x1 and not x2:
        raise DomainError("both inputs are empty")
    total = omega(alpha, seq.add(x1, x2))
    parts = seq.add(omega(alpha, x1), omega(alpha, x2))
    return seq.l2_norm(seq.subtract(total, parts)) / (seq.l2_norm(x1) + seq.l2_norm(x2))


def conjugate_transport(v: TwistedVector) -> TwistedVector:
    """Coordinatewise conjugation, an isometry of ``Z_2(alpha)`` onto ``Z_2(-alpha)``."""
    return TwistedVector(seq.conjugate(v.x), seq.conjugate(v.y))


def multiplier_boundedness(alpha: TwistLike, s: Multiplier, v: TwistedVector) -> float:
    if seq.multiplier_sup(s) > 1.0 + SUP_SLACK:
        raise DomainError("multiplier must satisfy ||s||_inf <= 1")
    base = quasi_norm(alpha, v)
    if base == 0.0:
        raise DomainError("v is zero")
    return quasi_norm(alpha, TwistedVector(seq.multiply(s, v.x), seq.multiply(s, v.y))) / base


def centralizer_bound(alpha: TwistLike) -> float:
    """``2 L / e`` with ``L = |1 + i alpha|``; an upper bound for :func:`centralizer_defect`."""
    return 2.0 * as_twist(alpha).lipschitz * INV_E


# randomized searches

N_CHUNKS = 16
MAX_WIDTH = 20.0


def random_coords(rng: np.random.Generator, dim: int, width: float = MAX_WIDTH) -> np.ndarray:
    """``r e^{i theta}`` with ``log r ~ U[-width, 0]`` and ``theta ~ U[0, 2 pi)``."""
    r = np.exp(-width * rng.random(dim))
    return r * np.exp(2j * np.pi * rng.random(dim))


def _random_dim(rng: np.random.Generator, max_dim: int) -> int:
    return int(min(max_dim, math.floor(math.exp(rng.uniform(0.0, math.log(max_dim + 1))))))


def _random_x(rng, dim):
    # the spread of magnitudes is itself random so near-flat vectors are sampled
    return random_coords(rng, dim, rng.uniform(0.0, MAX_WIDTH))


def _random_multiplier(rng, dim):
    if rng.random() < 0.5:
        return _random_x(rng, dim)
    keep = rng.random(dim) < rng.random()
    return keep * np.exp(2j * np.pi * rng.random(dim))


def _dense_norm(v: np.ndarray) -> float:
    return math.sqrt(math.fsum(seq._sq_moduli(v)))


def _dense_omega(v: np.ndarray, alpha: float) -> np.ndarray:
    out = np.zeros_like(v)
    nz = v != 0
    if nz.any():
        out[nz] = _omega_values(v[nz], _dense_norm(v[nz]), alpha)
    return out


@dataclass
class DefectReport:
    kind: str
    alpha: float
    dim: int
    samples: int
    seed: int
    sup_ratio: float
    arg_max: dict
    bound: float | None = None

    def to_obj(self) -> dict:
        return {
            "kind": self.kind,
            "alpha": self.alpha,
            "dim": self.dim,
            "samples": self.samples,
            "seed": self.seed,
            "sup_ratio": self.sup_ratio,
            "bound": self.bound,
            "arg_max": {k: seq.vector_to_obj(v) for k, v in self.arg_max.items()},
        }


def _chunk_sizes(samples: int, chunks: int) -> list[int]:
    base, extra = divmod(samples, chunks)
    return [base + (i < extra) for i in range(chunks)]


def _run_chunks(worker, samples: int, seed: int, workers: int):
    """Split ``samples`` over a fixed number of seeded chunks and max-reduce.

    The chunk count and seeds do not depend on ``workers``, so the result is
    the same for any degree of parallelism.
    """
    seeds = np.random.SeedSequence(seed).spawn(N_CHUNKS)
    sizes = _chunk_sizes(samples, N_CHUNKS)
    jobs = [(np.random.default_rng(ss), n) for ss, n in zip(seeds, sizes)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda job: worker(*job), jobs))
    else:
        results = [worker(*job) for job in jobs]
    best = (-1.0, None)
    for value, arg in results:  # first maximum in chunk order wins ties
        if value > best[0]:
            best = (value, arg)
    return best


def centralizer_search(alpha: TwistLike, samples: int = 100_000, max_dim: int = 512,
                       seed: int = 0, workers: int = 1) -> DefectReport:
    """Seeded random search for the supremum of :func:`centralizer_defect`."""
    al = as_twist(alpha).alpha

    def worker(rng, n):
        best, arg = -1.0, None
        for _ in range(n):
            dim = _random_dim(rng, max_dim)
            x = _random_x(rng, dim)
            s = _random_multiplier(rng, dim)
            d = _dense_norm(_dense_omega(s * x, al) - s * _dense_omega(x, al)) / _dense_norm(x)
            if d > best:
                best, arg = d, (s, x)
        return best, arg

    sup, (s, x) = _run_chunks(worker, samples, seed, workers)
    return DefectReport("centralizer", al, max_dim, samples, seed, sup,
                        {"s": FiniteVector.dense(s), "x": FiniteVector.dense(x)},
                        centralizer_bound(al))


def _random_pair(rng, dim):
    x1, x2 = _random_x(rng, dim), _random_x(rng, dim)
    mode = rng.integers(3)
    if mode == 1:  # disjoint supports
        m = rng.random(dim) < 0.5
        x1, x2 = x1 * m, x2 * ~m
    elif mode == 2:  # near cancellation
        x2 = -x1 * (1.0 + 0.1 * rng.standard_normal()) + 0.1 * x2
    if not (x1.any() or x2.any()):
        x1[0] = 1.0
    return x1, x2


def quasilinearity_search(alpha: TwistLike, dim: int, samples: int = 10_000,
                          seed: int = 0, workers: int = 1) -> DefectReport:
    """Seeded random search for the supremum of :func:`quasilinearity_defect` at fixed ``dim``."""
    al = as_twist(alpha).alpha

    def worker(rng, n):
        best, arg = -1.0, None
        for _ in range(n):
            x1, x2 = _random_pair(rng, dim)
            num = _dense_omega(x1 + x2, al) - _dense_omega(x1, al) - _dense_omega(x2, al)
            d = _dense_norm(num) / (_dense_norm(x1) + _dense_norm(x2))
            if d > best:
                best, arg = d, (x1, x2)
        return best, arg

    sup, (x1, x2) = _run_chunks(worker, samples, seed, workers)
    return DefectReport("quasilinearity", al, dim, samples, seed, sup,
                        {"x1": FiniteVector.dense(x1), "x2": FiniteVector.dense(x2)})


def multiplier_search(alpha: TwistLike, samples: int = 10_000, max_dim: int = 512,
                      seed: int = 0, workers: int = 1) -> DefectReport:
    """Seeded random search for the supremum of :func:`multiplier_boundedness`."""
    al = as_twist(alpha).alpha

    def qn(x, y):
        return _dense_norm(x) + _dense_norm(y - _dense_omega(x, al))

    def worker(rng, n):
        best, arg = -1.0, None
        for _ in range(n):
            dim = _random_dim(rng, max_dim)
            x = _random_x(rng, dim)
            # y near Omega(x) makes the second term small, where s hurts most
            y = _dense_omega(x, al) + rng.uniform(0.0, 1.0) * _random_x(rng, dim)
            s = _random_multiplier(rng, dim)
            base = qn(x, y)
            if base == 0.0:
                continue
            r = qn(s * x, s * y) / base
            if r > best:
                best, arg = r, (s, x, y)
        return best, arg

    sup, (s, x, y) = _run_chunks(worker, samples, seed, workers)
    return DefectReport("multiplier", al, max_dim, samples, seed, sup,
                        {"s": FiniteVector.dense(s), "x": FiniteVector.dense(x),
                         "y": FiniteVector.dense(y)},
                        1.0 + centralizer_bound(al))


def twisted_to_obj(alpha: TwistLike, v: TwistedVector) -> dict:
    return {"alpha": as_twist(alpha).alpha, "x": seq.vector_to_obj(v.x), "y": seq.vector_to_obj(v.y)}


def twisted_from_obj(obj: dict) -> tuple[TwistParameter, TwistedVector]:
    return (TwistParameter(float(obj["alpha"])),
            TwistedVector(seq.vector_from_obj(obj["x"]), seq.vector_from_obj(obj["y"])))
