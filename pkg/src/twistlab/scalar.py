"""The complex power ``t**b`` with ``b = 1 + i*beta`` and the three scalar
inequalities it satisfies for ``t > s >= 0``.

Writing ``t**b = t * exp(i*beta*log t)`` keeps the modulus exactly ``t`` up to
one rounding and makes ``cpow(t, conj b) == conj(cpow(t, b))`` bit for bit.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .errors import DomainError, PowerOverflowError

T_MAX = math.exp(700.0)
TOL_REL = 1e-10


@dataclass(frozen=True)
class Exponent:
    """``b = 1 + i*beta``."""

    beta: float

    def __post_init__(self):
        object.__setattr__(self, "beta", float(self.beta))
        if not math.isfinite(self.beta):
            raise DomainError("beta must be finite")

    @property
    def b(self) -> complex:
        return complex(1.0, self.beta)

    @property
    def modulus(self) -> float:
        return math.hypot(1.0, self.beta)

    def conj(self) -> "Exponent":
        return Exponent(-self.beta)


ExponentLike = Union[Exponent, float, int]


def as_exponent(b: ExponentLike) -> Exponent:
    if isinstance(b, Exponent):
        return b
    if hasattr(b, "exponent"):
        return b.exponent
    return Exponent(float(b))


def cpow(t, b: ExponentLike):
    """``t**b`` for real ``t >= 0``; ``0**b = 0``.

    Accepts a scalar or an array of ``t``. Raises :class:`DomainError` for
    negative ``t`` and :class:`PowerOverflowError` above ``exp(700)``.
    """
    beta = as_exponent(b).beta
    if np.ndim(t) == 0:
        t = float(t)
        if not t >= 0.0:
            raise DomainError(f"cpow needs t >= 0, got {t}")
        if t > T_MAX:
            raise PowerOverflowError(f"t = {t} exceeds exp(700)")
        if t == 0.0:
            return 0j
        ph = beta * math.log(t)
        return complex(t * math.cos(ph), t * math.sin(ph))
    t = np.asarray(t, dtype=np.float64)
    if t.size:
        if not np.all(t >= 0.0):
            raise DomainError("cpow needs t >= 0")
        if np.any(t > T_MAX):
            raise PowerOverflowError("t exceeds exp(700)")
    out = np.zeros(t.shape, dtype=np.complex128)
    pos = t > 0.0
    tp = t[pos]
    ph = beta * np.log(tp)
    out.real[pos] = tp * np.cos(ph)
    out.imag[pos] = tp * np.sin(ph)
    return out


def lipschitz_bound(b: ExponentLike) -> float:
    """Lipschitz constant of ``t -> t**b`` on ``[0, inf)``, namely ``|b|``."""
    return as_exponent(b).modulus


class BoundCheck(NamedTuple):
    holds: bool
    lhs: float
    rhs: float


def _check_pair(t: float, s: float, strict_s: bool = False) -> tuple[float, float]:
    t, s = float(t), float(s)
    if not (math.isfinite(t) and math.isfinite(s)):
        raise DomainError("t and s must be finite")
    if strict_s and not s > 0.0:
        raise DomainError(f"need s > 0, got s = {s}")
    if not s >= 0.0:
        raise DomainError(f"need s >= 0, got s = {s}")
    if not t > s:
        raise DomainError(f"need t > s, got t = {t}, s = {s}")
    return t, s


def check_lower(t: float, s: float, b: ExponentLike, tol_rel: float = TOL_REL) -> BoundCheck:
    """``|t**b - s**b| >= t - s``."""
    t, s = _check_pair(t, s)
    lhs = float(power_gaps(t, s, as_exponent(b).beta)[0])
    rhs = t - s
    return BoundCheck(lhs >= rhs - tol_rel * rhs, lhs, rhs)


def check_upper(t: float, s: float, b: ExponentLike, tol_rel: float = TOL_REL) -> BoundCheck:
    """``|t**b - s**b| <= |b| (t - s)``."""
    t, s = _check_pair(t, s)
    e = as_exponent(b)
    lhs = float(power_gaps(t, s, e.beta)[0])
    rhs = e.modulus * (t - s)
    return BoundCheck(lhs <= rhs + tol_rel * rhs, lhs, rhs)


def _cexpm1(z: np.ndarray) -> np.ndarray:
    """``exp(z) - 1`` without cancellation for small complex ``z``."""
    x, y = z.real, z.imag
    re = np.expm1(x) * np.cos(y) - 2.0 * np.sin(0.5 * y) ** 2
    return re + 1j * (np.exp(x) * np.sin(y))


def _series(z, coeffs):
    acc = np.zeros_like(z)
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc * z * z


_EXP_TAIL = [1.0 / math.factorial(k) for k in range(2, 26)]  # exp(z) - 1 - z
_LOG_TAIL = [(-1.0) ** (k + 1) / k for k in range(2, 20)]  # log1p(h) - h


def _expm1_minus_id(z: np.ndarray) -> np.ndarray:
    small = np.abs(z) < 0.5
    return np.where(small, _series(z, _EXP_TAIL), _cexpm1(z) - z)


def _log1p_minus_id(h: np.ndarray) -> np.ndarray:
    small = np.abs(h) < 0.1
    return np.where(small, _series(h, _LOG_TAIL), np.log1p(h) - h)


def power_gaps(t, s, beta):
    """``|t**b - s**b|`` and ``|t**b - s**b - b s**(b-1) (t - s)|`` for ``t > s >= 0``.

    Both are evaluated as ``s * |g(h)|`` with ``h = (t - s) / s``, where
    ``g(h) = (1+h)**b - 1`` or ``(1+h)**b - 1 - b h``. Since ``|s**b| = s`` no
    phase of size ``beta log s`` is ever rounded, so nearby ``t, s`` keep full
    relative accuracy. ``beta = 0`` is exact: ``t - s`` and ``0``.
    """
    t, s, beta = np.broadcast_arrays(*(np.asarray(v, dtype=np.float64) for v in (t, s, beta)))
    b = 1.0 + 1j * beta
    pos = s > 0.0
    sp = np.where(pos, s, 1.0)
    h = (t - s) / sp
    L = np.log1p(h)
    z = b * L
    diff = np.where(pos, sp * np.abs(_cexpm1(z)), t)
    rem = sp * np.abs(_expm1_minus_id(z) + b * _log1p_minus_id(h))
    real = beta == 0.0
    diff = np.where(real, t - s, diff)
    rem = np.where(real, 0.0, np.where(pos, rem, np.nan))
    return diff, rem


def taylor_remainder(t: float, s: float, b: ExponentLike) -> float:
    """``|t**b - s**b - b s**(b-1) (t - s)|`` for ``t > s > 0``."""
    return float(power_gaps(t, s, as_exponent(b).beta)[1])


def check_taylor(t: float, s: float, b: ExponentLike, tol_rel: float = TOL_REL) -> BoundCheck:
    """First-order Taylor remainder against ``|b| (t - s)**2 / (2 s)``.

    This constant is only valid for ``|beta| <= 1``; see :func:`check_taylor_sharp`.
    """
    t, s = _check_pair(t, s, strict_s=True)
    e = as_exponent(b)
    lhs = taylor_remainder(t, s, e)
    rhs = 0.5 * e.modulus * (t - s) ** 2 / s
    return BoundCheck(lhs <= rhs + tol_rel * rhs, lhs, rhs)


def check_taylor_sharp(t: float, s: float, b: ExponentLike, tol_rel: float = TOL_REL) -> BoundCheck:
    """Taylor remainder against ``|b| |b - 1| (t - s)**2 / (2 s)``.

    ``|d^2/du^2 u**b| = |b| |beta| / u``, so this holds for every ``beta``
    and is attained to leading order as ``t -> s``. For ``beta = 0`` both
    sides vanish.
    """
    t, s = _check_pair(t, s, strict_s=True)
    e = as_exponent(b)
    lhs = taylor_remainder(t, s, e)
    rhs = 0.5 * e.modulus * abs(e.beta) * (t - s) ** 2 / s
    slack = tol_rel * max(rhs, 1e-15 * (t + s))
    return BoundCheck(lhs <= rhs + slack, lhs, rhs)


CHECKS = {
    "lower": check_lower,
    "upper": check_upper,
    "taylor": check_taylor,
    "taylor_sharp": check_taylor_sharp,
}


@dataclass
class SweepResult:
    t: np.ndarray
    s: np.ndarray
    beta: np.ndarray
    lhs: dict
    rhs: dict
    holds: dict

    def violations(self) -> dict[str, int]:
        return {k: int(np.count_nonzero(~v)) for k, v in self.holds.items()}

    def to_csv(self, check: str) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "s", "beta", "lhs", "rhs", "holds"])
        for row in zip(self.t, self.s, self.beta, self.lhs[check], self.rhs[check], self.holds[check]):
            w.writerow([repr(float(v)) for v in row[:5]] + [str(bool(row[5])).lower()])
        return buf.getvalue()


def sample_pairs(n: int, seed: int, t_max: float = 1e3, beta_max: float = 10.0):
    """``n`` seeded draws with ``t > s`` in ``(0, t_max]`` and ``beta`` in ``[-beta_max, beta_max]``."""
    rng = np.random.default_rng(seed)
    u = t_max * (1.0 - rng.random((n, 2)))  # (0, t_max]
    t, s = u.max(axis=1), u.min(axis=1)
    tie = t == s
    if tie.any():
        s[tie] = np.nextafter(t[tie], 0.0)
    beta = rng.uniform(-beta_max, beta_max, n)
    return t, s, beta


def sweep_bounds(n: int, seed: int, t_max: float = 1e3, beta_max: float = 10.0,
                 tol_rel: float = TOL_REL, checks=("lower", "upper", "taylor")) -> SweepResult:
    """Vectorized evaluation of the inequality checks on seeded random samples.

    Same formulas and tolerances as the scalar checkers, applied elementwise.
    """
    t, s, beta = sample_pairs(n, seed, t_max, beta_max)
    diff, rem = power_gaps(t, s, beta)
    mod_b = np.hypot(1.0, beta)
    d = t - s
    lhs, rhs, holds = {}, {}, {}
    for name in checks:
        if name == "lower":
            lhs[name], rhs[name] = diff, d
            holds[name] = diff >= d - tol_rel * d
        elif name == "upper":
            r = mod_b * d
            lhs[name], rhs[name] = diff, r
            holds[name] = diff <= r + tol_rel * r
        elif name in ("taylor", "taylor_sharp"):
            coef = mod_b if name == "taylor" else mod_b * np.abs(beta)
            r = 0.5 * coef * d * d / s
            lhs[name], rhs[name] = rem, r
            if name == "taylor":
                holds[name] = rem <= r + tol_rel * r
            else:
                holds[name] = rem <= r + tol_rel * np.maximum(r, 1e-15 * (t + s))
        else:
            raise ValueError(f"unknown check {name!r}")
    return SweepResult(t, s, beta, lhs, rhs, holds)
