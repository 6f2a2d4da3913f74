"""Finite-support complex sequences.

A :class:`FiniteVector` stores only its nonzero coordinates, as a sorted array
of 1-based indices and a parallel array of complex values. Everything is
immutable; operations return new vectors.
"""
from __future__ import annotations

import csv
import io
import json
import math
from typing import Iterable, Mapping, Union

import numpy as np

from .errors import DomainError

Multiplier = Union["FiniteVector", complex, float, int]


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


class FiniteVector:
    """Element of the space of complex sequences with finitely many nonzero entries."""

    __slots__ = ("indices", "values")

    def __init__(self, indices=(), values=()):
        idx = np.asarray(indices, dtype=np.uint64).reshape(-1)
        val = np.asarray(values, dtype=np.complex128).reshape(-1)
        if idx.shape != val.shape:
            raise ValueError("indices and values must have the same length")
        if idx.size and idx.min() < 1:
            raise DomainError("indices are 1-based")
        order = np.argsort(idx, kind="stable")
        idx, val = idx[order], val[order]
        if idx.size > 1 and np.any(idx[1:] == idx[:-1]):
            raise ValueError("duplicate index")
        keep = val != 0
        if not keep.all():
            idx, val = idx[keep], val[keep]
        object.__setattr__(self, "indices", _frozen(np.ascontiguousarray(idx)))
        object.__setattr__(self, "values", _frozen(np.ascontiguousarray(val)))

    def __setattr__(self, name, value):
        raise AttributeError("FiniteVector is immutable")

    @classmethod
    def _canonical(cls, idx: np.ndarray, val: np.ndarray) -> "FiniteVector":
        # idx already sorted and unique
        keep = val != 0
        if not keep.all():
            idx, val = idx[keep], val[keep]
        out = object.__new__(cls)
        object.__setattr__(out, "indices", _frozen(np.ascontiguousarray(idx, dtype=np.uint64)))
        object.__setattr__(out, "values", _frozen(np.ascontiguousarray(val, dtype=np.complex128)))
        return out

    @classmethod
    def dense(cls, values, start: int = 1) -> "FiniteVector":
        """Vector whose coordinates ``start, start+1, ...`` are ``values``."""
        val = np.asarray(values, dtype=np.complex128).reshape(-1)
        idx = np.arange(start, start + val.size, dtype=np.uint64)
        return cls._canonical(idx, val)

    @classmethod
    def from_mapping(cls, entries: Mapping[int, complex]) -> "FiniteVector":
        return cls(list(entries.keys()), list(entries.values()))

    @classmethod
    def basis(cls, n: int) -> "FiniteVector":
        return cls([n], [1.0])

    def __len__(self) -> int:
        return int(self.indices.size)

    def __bool__(self) -> bool:
        return self.indices.size > 0

    def __repr__(self) -> str:
        body = ", ".join(f"{int(i)}: {v!r}" for i, v in zip(self.indices[:6], self.values[:6]))
        more = ", ..." if len(self) > 6 else ""
        return f"FiniteVector({{{body}{more}}})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, FiniteVector):
            return NotImplemented
        return np.array_equal(self.indices, other.indices) and np.array_equal(self.values, other.values)

    __hash__ = None

    def __getitem__(self, n: int) -> complex:
        pos = np.searchsorted(self.indices, np.uint64(n))
        if pos < self.indices.size and self.indices[pos] == n:
            return complex(self.values[pos])
        return 0j

    def to_dict(self) -> dict[int, complex]:
        return {int(i): complex(v) for i, v in zip(self.indices, self.values)}

    @property
    def support_max(self) -> int:
        return int(self.indices[-1]) if self.indices.size else 0

    def l2_norm(self) -> float:
        return l2_norm(self)

    def sup_norm(self) -> float:
        return sup_norm(self)

    def __add__(self, other: "FiniteVector") -> "FiniteVector":
        return add(self, other)

    def __sub__(self, other: "FiniteVector") -> "FiniteVector":
        return subtract(self, other)

    def __neg__(self) -> "FiniteVector":
        return scale(self, -1.0)

    def __mul__(self, c: complex) -> "FiniteVector":
        return scale(self, c)

    __rmul__ = __mul__


def _sq_moduli(values: np.ndarray) -> np.ndarray:
    return values.real * values.real + values.imag * values.imag


def l2_norm(x: FiniteVector) -> float:
    # fsum is correctly rounded, hence independent of summation order
    if not x:
        return 0.0
    return math.sqrt(math.fsum(_sq_moduli(x.values)))


def sup_norm(x: FiniteVector) -> float:
    # same squared moduli as l2_norm, so sup_norm <= l2_norm holds exactly
    if not x:
        return 0.0
    return math.sqrt(float(_sq_moduli(x.values).max()))


def indicator(A: Iterable[int]) -> FiniteVector:
    """The vector ``xi_A``: ones on ``A``, zero elsewhere."""
    if isinstance(A, range) and A.step > 0:
        idx = np.arange(A.start, A.stop, A.step, dtype=np.int64)
    else:
        idx = np.unique(np.fromiter((int(n) for n in A), dtype=np.int64))
    if idx.size == 0:
        raise DomainError("indicator of the empty set is not defined")
    if idx[0] < 1:
        raise DomainError("indices are 1-based")
    return FiniteVector._canonical(idx.astype(np.uint64), np.ones(idx.size, dtype=np.complex128))


def _align(x: FiniteVector, y: FiniteVector):
    if np.array_equal(x.indices, y.indices):
        return x.indices, x.values, y.values
    idx = np.union1d(x.indices, y.indices)
    xv = np.zeros(idx.size, dtype=np.complex128)
    yv = np.zeros(idx.size, dtype=np.complex128)
    xv[np.searchsorted(idx, x.indices)] = x.values
    yv[np.searchsorted(idx, y.indices)] = y.values
    return idx, xv, yv


def add(x: FiniteVector, y: FiniteVector) -> FiniteVector:
    idx, xv, yv = _align(x, y)
    return FiniteVector._canonical(idx, xv + yv)


def subtract(x: FiniteVector, y: FiniteVector) -> FiniteVector:
    idx, xv, yv = _align(x, y)
    return FiniteVector._canonical(idx, xv - yv)


def scale(x: FiniteVector, c: complex) -> FiniteVector:
    return FiniteVector._canonical(x.indices, x.values * complex(c))


def conjugate(x: FiniteVector) -> FiniteVector:
    return FiniteVector._canonical(x.indices, np.conj(x.values))


def multiplier_values(s: Multiplier, x: FiniteVector) -> np.ndarray:
    """Values of the multiplier ``s`` on the support of ``x``.

    A scalar is read as the constant sequence; a :class:`FiniteVector` is
    zero off its own support.
    """
    if isinstance(s, FiniteVector):
        out = np.zeros(len(x), dtype=np.complex128)
        pos = np.searchsorted(s.indices, x.indices)
        pos = np.minimum(pos, max(len(s) - 1, 0))
        if len(s):
            hit = s.indices[pos] == x.indices
            out[hit] = s.values[pos[hit]]
        return out
    return np.full(len(x), complex(s), dtype=np.complex128)


def multiplier_sup(s: Multiplier) -> float:
    if isinstance(s, FiniteVector):
        return sup_norm(s)
    return abs(complex(s))


def multiply(s: Multiplier, x: FiniteVector) -> FiniteVector:
    """Coordinatewise product ``s x``."""
    return FiniteVector._canonical(x.indices, multiplier_values(s, x) * x.values)


class Permutation:
    """Bijection of ``{1, ..., n}`` given by the array ``(pi(1), ..., pi(n))``."""

    __slots__ = ("image",)

    def __init__(self, image):
        img = np.asarray(image, dtype=np.int64).reshape(-1)
        n = img.size
        if n == 0 or not np.array_equal(np.sort(img), np.arange(1, n + 1)):
            raise DomainError("not a permutation of {1, ..., n}")
        img.flags.writeable = False
        object.__setattr__(self, "image", img)

    def __setattr__(self, name, value):
        raise AttributeError("Permutation is immutable")

    def __len__(self) -> int:
        return int(self.image.size)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(1, n + 1))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "Permutation":
        return cls(rng.permutation(n) + 1)

    def inverse(self) -> "Permutation":
        inv = np.empty_like(self.image)
        inv[self.image - 1] = np.arange(1, self.image.size + 1)
        return Permutation(inv)


def permute(x: FiniteVector, pi: Permutation) -> FiniteVector:
    """Rearrangement ``x_pi(n) = x(pi(n))``."""
    if x.support_max > len(pi):
        raise DomainError(f"permutation window {len(pi)} does not cover index {x.support_max}")
    inv = pi.inverse().image
    new_idx = inv[x.indices.astype(np.int64) - 1].astype(np.uint64)
    order = np.argsort(new_idx, kind="stable")
    return FiniteVector._canonical(new_idx[order], x.values[order])


# serialization


def vector_to_obj(x: FiniteVector) -> dict:
    return {"entries": [[int(i), float(v.real), float(v.imag)] for i, v in zip(x.indices, x.values)]}


def vector_from_obj(obj: Mapping) -> FiniteVector:
    entries = obj["entries"]
    if not entries:
        return FiniteVector()
    idx = [int(e[0]) for e in entries]
    val = [complex(float(e[1]), float(e[2])) for e in entries]
    return FiniteVector(idx, val)


def vector_to_json(x: FiniteVector) -> str:
    return json.dumps(vector_to_obj(x))


def vector_from_json(text: str) -> FiniteVector:
    return vector_from_obj(json.loads(text))


def vector_to_csv(x: FiniteVector) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "re", "im"])
    for i, v in zip(x.indices, x.values):
        w.writerow([int(i), repr(float(v.real)), repr(float(v.imag))])
    return buf.getvalue()


def vector_from_csv(text: str) -> FiniteVector:
    rows = list(csv.DictReader(io.StringIO(text)))
    return FiniteVector([int(r["index"]) for r in rows],
                        [complex(float(r["re"]), float(r["im"])) for r in rows])
