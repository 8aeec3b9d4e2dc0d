"""
Convex scalar functions with exact subgradients.

Each function carries its input dimension ``m`` and rejects inputs of any
other size.  Subgradients at kinks are chosen deterministically so that
simulations are reproducible.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DimensionMismatch


def _vector(x, m):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.shape != (m,):
        raise DimensionMismatch(f"expected a vector of dimension {m}, got shape {x.shape}")
    return x


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


class ConvexScalarFunction:
    """Base class.  Subclasses implement ``_value`` and ``_subgradient``."""

    kind = ""
    m: int

    def value(self, x) -> float:
        return self._value(_vector(x, self.m))

    def subgradient(self, x) -> np.ndarray:
        return self._subgradient(_vector(x, self.m))

    def subgradient_bound(self) -> Optional[float]:
        return None

    def params(self) -> dict:
        """Parameters in config-file form (see :func:`from_spec`)."""
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Affine(ConvexScalarFunction):
    """``c . x + d``."""

    c: np.ndarray
    d: float = 0.0
    kind = "affine"

    def __post_init__(self):
        c = _frozen(np.atleast_1d(self.c))
        if c.ndim != 1:
            raise ValueError("c must be a vector")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", float(self.d))

    @property
    def m(self):
        return self.c.shape[0]

    def _value(self, x):
        return float(self.c @ x + self.d)

    def _subgradient(self, x):
        return self.c.copy()

    def subgradient_bound(self):
        return float(np.linalg.norm(self.c))

    def params(self):
        return {"c": self.c.tolist(), "d": self.d}


@dataclass(frozen=True, eq=False)
class ConvexQuadratic(ConvexScalarFunction):
    """``0.5 x^T Q x + c . x + d`` with ``Q`` symmetric positive semidefinite."""

    Q: np.ndarray
    c: np.ndarray
    d: float = 0.0
    kind = "quadratic"

    def __post_init__(self):
        Q = np.atleast_2d(np.array(self.Q, dtype=float))
        c = np.atleast_1d(np.array(self.c, dtype=float))
        if Q.shape != (c.shape[0], c.shape[0]):
            raise ValueError(f"Q has shape {Q.shape}, expected {(c.shape[0],) * 2}")
        if not np.allclose(Q, Q.T, rtol=0, atol=1e-12 * max(1.0, np.abs(Q).max())):
            raise ValueError("Q must be symmetric")
        if np.linalg.eigvalsh(Q).min() < -1e-10 * max(1.0, np.abs(Q).max()):
            raise ValueError("Q must be positive semidefinite")
        object.__setattr__(self, "Q", _frozen(Q))
        object.__setattr__(self, "c", _frozen(c))
        object.__setattr__(self, "d", float(self.d))

    @property
    def m(self):
        return self.c.shape[0]

    def _value(self, x):
        return float(0.5 * x @ self.Q @ x + self.c @ x + self.d)

    def _subgradient(self, x):
        return self.Q @ x + self.c

    def params(self):
        return {"Q": self.Q.tolist(), "c": self.c.tolist(), "d": self.d}


@dataclass(frozen=True, eq=False)
class HuberQuadratic(ConvexScalarFunction):
    """
    Scalar quadratic with linear tails.

    ``0.5 w x^2`` for ``|x| <= r`` and ``w r |x| - 0.5 w r^2`` outside; the
    pieces agree in value and slope at ``|x| = r``.  Only ``m = 1``.
    """

    w: float
    r: float
    kind = "huber"
    m = 1

    def __post_init__(self):
        if not (self.w > 0 and self.r > 0):
            raise ValueError("huber needs w > 0 and r > 0")
        object.__setattr__(self, "w", float(self.w))
        object.__setattr__(self, "r", float(self.r))

    def _value(self, x):
        a = abs(x[0])
        if a <= self.r:
            return 0.5 * self.w * a * a
        return self.w * self.r * a - 0.5 * self.w * self.r * self.r

    def _subgradient(self, x):
        v = x[0]
        if abs(v) <= self.r:
            return np.array([self.w * v])
        return np.array([math.copysign(self.w * self.r, v)])

    def subgradient_bound(self):
        return self.w * self.r

    def params(self):
        return {"w": self.w, "r": self.r}


@dataclass(frozen=True, eq=False)
class MaxOfAffine(ConvexScalarFunction):
    """``max_k (c_k . x + d_k)``; ties resolve to the lowest index."""

    C: np.ndarray
    d: np.ndarray
    kind = "max_affine"

    def __post_init__(self):
        C = np.atleast_2d(np.array(self.C, dtype=float))
        d = np.atleast_1d(np.array(self.d, dtype=float))
        if C.shape[0] == 0 or d.shape != (C.shape[0],):
            raise ValueError("max_affine needs one offset per affine piece")
        object.__setattr__(self, "C", _frozen(C))
        object.__setattr__(self, "d", _frozen(d))

    @property
    def m(self):
        return self.C.shape[1]

    def _value(self, x):
        return float(np.max(self.C @ x + self.d))

    def _subgradient(self, x):
        return self.C[int(np.argmax(self.C @ x + self.d))].copy()

    def subgradient_bound(self):
        return float(np.linalg.norm(self.C, axis=1).max())

    def params(self):
        return {"pieces": [{"c": c.tolist(), "d": float(dk)} for c, dk in zip(self.C, self.d)]}


@dataclass(frozen=True)
class PlusFunction:
    """``max(base(x), 0)``, zero exactly on the feasible set of ``base(x) <= 0``."""

    base: ConvexScalarFunction

    @property
    def m(self):
        return self.base.m

    def value(self, x):
        return max(self.base.value(x), 0.0)

    def subgradient(self, x):
        x = _vector(x, self.m)
        if self.base._value(x) > 0:
            return self.base._subgradient(x)
        return np.zeros(self.m)

    def subgradient_bound(self):
        return self.base.subgradient_bound()


# functional aliases mirroring the method names

def value(f, x):
    return f.value(x)


def subgradient(f, x):
    return f.subgradient(x)


def plus_value(p: PlusFunction, x):
    return p.value(x)


def plus_subgradient(p: PlusFunction, x):
    return p.subgradient(x)


def subgradient_bound(f):
    return f.subgradient_bound()


KINDS = {cls.kind: cls for cls in (Affine, ConvexQuadratic, HuberQuadratic, MaxOfAffine)}


def from_spec(spec: dict) -> ConvexScalarFunction:
    """
    Build a function from its config form, e.g.
    ``{"kind": "affine", "c": [2, 3, 4], "d": -0.1}``.
    """
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind not in KINDS:
        raise ValueError(f"unknown function kind {kind!r}; expected one of {sorted(KINDS)}")
    if kind == "max_affine":
        pieces = spec.pop("pieces")
        if spec:
            raise ValueError(f"unexpected fields {sorted(spec)}")
        return MaxOfAffine([p["c"] for p in pieces], [p["d"] for p in pieces])
    return KINDS[kind](**spec)


def to_spec(f: ConvexScalarFunction) -> dict:
    return {"kind": f.kind, **f.params()}
