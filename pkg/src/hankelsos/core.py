"""Generating vectors and the quartic form of an order-4, dimension-4 Hankel tensor.

Thirteen numbers v0..v12 determine the tensor entry at (i1, i2, i3, i4) as
v indexed by i1+i2+i3+i4-4 (1-based indices), and therefore a homogeneous
quartic in four variables.  Three independent evaluation routes live here:
the hand-expanded 13-group form (fast path), the literal 256-term sum
(test oracle), and the 35-coefficient monomial table.  The symmetric-slice
assembly used by every other module lives here too.

Multi-indices are ordered graded-lexicographically with x1 > x2 > x3 > x4.
That order is fixed once and shared by all modules.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

__all__ = [
    "GeneratingVector",
    "SlicePoint",
    "Vec4",
    "QuarticForm",
    "MONOMIALS_DEG4",
    "MONOMIALS_DEG2",
    "PAIR_ALPHA_DEG2",
    "gram_to_quartic_vector",
    "assemble",
    "evaluate",
    "evaluate_oracle",
    "gradient",
    "to_quartic",
    "quartic_coefficients",
]


def _monomials(degree: int) -> tuple[tuple[int, int, int, int], ...]:
    out = []
    for a1 in range(degree, -1, -1):
        for a2 in range(degree - a1, -1, -1):
            for a3 in range(degree - a1 - a2, -1, -1):
                out.append((a1, a2, a3, degree - a1 - a2 - a3))
    return tuple(out)


#: The 35 degree-4 multi-indices, graded-lex order.
MONOMIALS_DEG4 = _monomials(4)
#: The 10 degree-2 multi-indices (x1^2, x1x2, x1x3, x1x4, x2^2, ..., x4^2).
MONOMIALS_DEG2 = _monomials(2)

MONOMIAL_INDEX_DEG4 = {m: i for i, m in enumerate(MONOMIALS_DEG4)}
MONOMIAL_INDEX_DEG2 = {m: i for i, m in enumerate(MONOMIALS_DEG2)}

_E4 = np.asarray(MONOMIALS_DEG4, dtype=np.int64)
_FACT = (1, 1, 2, 6, 24)
#: 4!/(a1! a2! a3! a4!) for each degree-4 multi-index.
MULTINOMIAL_DEG4 = np.asarray(
    [24 // (_FACT[a1] * _FACT[a2] * _FACT[a3] * _FACT[a4]) for a1, a2, a3, a4 in MONOMIALS_DEG4],
    dtype=np.float64,
)
#: Which generating-vector entry each degree-4 monomial reads: a2 + 2*a3 + 3*a4.
V_INDEX_DEG4 = np.asarray([a2 + 2 * a3 + 3 * a4 for _, a2, a3, a4 in MONOMIALS_DEG4], dtype=np.int64)


#: Index into MONOMIALS_DEG4 of the product of the i-th and j-th degree-2 monomials.
PAIR_ALPHA_DEG2 = np.asarray(
    [
        [
            MONOMIAL_INDEX_DEG4[tuple(a + b for a, b in zip(mi, mj))]
            for mj in MONOMIALS_DEG2
        ]
        for mi in MONOMIALS_DEG2
    ],
    dtype=np.int64,
)


def gram_to_quartic_vector(G: np.ndarray) -> np.ndarray:
    """Quartic coefficients of z^T G z over the degree-2 monomial basis z."""
    G = np.asarray(G, dtype=np.float64)
    if G.shape != (10, 10):
        raise ValueError("Gram matrix must be 10x10")
    return np.bincount(PAIR_ALPHA_DEG2.ravel(), weights=G.ravel(), minlength=35)


def _finite_floats(values: Iterable[float], what: str, count: int) -> tuple[float, ...]:
    out = tuple(float(t) for t in values)
    if len(out) != count:
        raise ValueError(f"{what} needs exactly {count} entries, got {len(out)}")
    if not all(math.isfinite(t) for t in out):
        raise ValueError(f"{what} entries must be finite")
    return out


@dataclass(frozen=True)
class GeneratingVector:
    """The 13 numbers v0..v12 defining a fourth-order four-dimensional Hankel tensor."""

    v: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "v", _finite_floats(self.v, "generating vector", 13))

    def __getitem__(self, i: int) -> float:
        return self.v[i]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.v, dtype=np.float64)

    def to_json(self) -> str:
        return json.dumps(list(self.v))

    @classmethod
    def from_json(cls, text: str) -> "GeneratingVector":
        return cls(json.loads(text))


@dataclass(frozen=True)
class SlicePoint:
    """Point P = (v2, v6, v1, v3, v5) of the symmetric family with v4 = v8 = 1.

    Field order follows the convention that v2 and v6 come first.
    """

    v2: float
    v6: float
    v1: float
    v3: float
    v5: float

    def __post_init__(self):
        vals = _finite_floats((self.v2, self.v6, self.v1, self.v3, self.v5), "slice point", 5)
        for name, val in zip(("v2", "v6", "v1", "v3", "v5"), vals):
            object.__setattr__(self, name, val)

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.v2, self.v6, self.v1, self.v3, self.v5)

    @classmethod
    def from_sequence(cls, seq: Sequence[float]) -> "SlicePoint":
        vals = _finite_floats(seq, "slice point", 5)
        return cls(*vals)


@dataclass(frozen=True)
class Vec4:
    """A point x = (x1, x2, x3, x4)."""

    x1: float
    x2: float
    x3: float
    x4: float

    def __post_init__(self):
        vals = _finite_floats((self.x1, self.x2, self.x3, self.x4), "vector", 4)
        for name, val in zip(("x1", "x2", "x3", "x4"), vals):
            object.__setattr__(self, name, val)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x1, self.x2, self.x3, self.x4)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.as_tuple(), dtype=np.float64)

    @classmethod
    def from_sequence(cls, seq: Sequence[float]) -> "Vec4":
        return cls(*_finite_floats(seq, "vector", 4))


PointLike = Union[Vec4, Sequence[float]]


def _as_point(x: PointLike) -> tuple[float, float, float, float]:
    if isinstance(x, Vec4):
        return x.as_tuple()
    return _finite_floats(x, "vector", 4)


@dataclass(frozen=True)
class QuarticForm:
    """Dense coefficient map over the 35 degree-4 monomials; f(x) = sum c_a * x^a."""

    coefficients: dict

    def __post_init__(self):
        coeffs = {tuple(int(a) for a in k): float(c) for k, c in self.coefficients.items()}
        if set(coeffs) != set(MONOMIALS_DEG4):
            raise ValueError("quartic form needs exactly the 35 degree-4 multi-indices")
        if not all(math.isfinite(c) for c in coeffs.values()):
            raise ValueError("quartic form coefficients must be finite")
        object.__setattr__(self, "coefficients", coeffs)

    def vector(self) -> np.ndarray:
        """Coefficients in the canonical graded-lex order."""
        return np.asarray([self.coefficients[m] for m in MONOMIALS_DEG4], dtype=np.float64)

    def evaluate(self, x: PointLike) -> float:
        pt = np.asarray(_as_point(x), dtype=np.float64)
        return float(DenseQuartic(self.vector()).values(pt[None, :])[0])

    @classmethod
    def from_vector(cls, coeffs: Sequence[float]) -> "QuarticForm":
        vals = np.asarray(coeffs, dtype=np.float64)
        if vals.shape != (35,):
            raise ValueError("coefficient vector must have length 35")
        return cls(dict(zip(MONOMIALS_DEG4, vals.tolist())))

    def to_json(self) -> str:
        return json.dumps(
            {"".join(str(a) for a in m): self.coefficients[m] for m in MONOMIALS_DEG4}
        )

    @classmethod
    def from_json(cls, text: str) -> "QuarticForm":
        raw = json.loads(text)
        coeffs = {}
        for key, val in raw.items():
            if len(key) != 4 or not key.isdigit():
                raise ValueError(f"bad multi-index key {key!r}")
            coeffs[tuple(int(ch) for ch in key)] = float(val)
        return cls(coeffs)


def assemble(point: SlicePoint, v0: float) -> GeneratingVector:
    """Symmetric generating vector (v0, v1, v2, v3, 1, v5, v6, v5, 1, v3, v2, v1, v0)."""
    v0 = float(v0)
    if not math.isfinite(v0):
        raise ValueError("v0 must be finite")
    p = point
    return GeneratingVector(
        (v0, p.v1, p.v2, p.v3, 1.0, p.v5, p.v6, p.v5, 1.0, p.v3, p.v2, p.v1, v0)
    )


def _expanded(v, x1, x2, x3, x4):
    # Hand-expanded 13-group form; works on scalars and on numpy arrays alike.
    x12 = x1 * x1
    x22 = x2 * x2
    x32 = x3 * x3
    x42 = x4 * x4
    return (
        v[0] * x12 * x12
        + 4.0 * v[1] * x12 * x1 * x2
        + v[2] * (4.0 * x12 * x1 * x3 + 6.0 * x12 * x22)
        + v[3] * (4.0 * x1 * x22 * x2 + 4.0 * x12 * x1 * x4 + 12.0 * x12 * x2 * x3)
        + v[4] * (x22 * x22 + 6.0 * x12 * x32 + 12.0 * x1 * x22 * x3 + 12.0 * x12 * x2 * x4)
        + v[5]
        * (4.0 * x22 * x2 * x3 + 12.0 * x1 * x2 * x32 + 12.0 * x1 * x22 * x4 + 12.0 * x12 * x3 * x4)
        + v[6]
        * (
            4.0 * x1 * x32 * x3
            + 4.0 * x22 * x2 * x4
            + 6.0 * x12 * x42
            + 6.0 * x22 * x32
            + 24.0 * x1 * x2 * x3 * x4
        )
        + v[7]
        * (4.0 * x2 * x32 * x3 + 12.0 * x22 * x3 * x4 + 12.0 * x1 * x32 * x4 + 12.0 * x1 * x2 * x42)
        + v[8] * (x32 * x32 + 6.0 * x22 * x42 + 12.0 * x2 * x32 * x4 + 12.0 * x1 * x3 * x42)
        + v[9] * (4.0 * x32 * x3 * x4 + 4.0 * x1 * x42 * x4 + 12.0 * x2 * x3 * x42)
        + v[10] * (4.0 * x2 * x42 * x4 + 6.0 * x32 * x42)
        + 4.0 * v[11] * x3 * x42 * x4
        + v[12] * x42 * x42
    )


def evaluate(v: GeneratingVector, x: PointLike) -> float:
    """Value of the Hankel quartic at x, via the expanded 13-group form."""
    x1, x2, x3, x4 = _as_point(x)
    return float(_expanded(v.v, x1, x2, x3, x4))


def evaluate_oracle(v: GeneratingVector, x: PointLike) -> float:
    """Literal 256-term sum over all index tuples; reference route for tests."""
    pt = _as_point(x)
    total = 0.0
    for i1 in range(4):
        for i2 in range(4):
            for i3 in range(4):
                for i4 in range(4):
                    total += v.v[i1 + i2 + i3 + i4] * pt[i1] * pt[i2] * pt[i3] * pt[i4]
    return total


def quartic_coefficients(v: GeneratingVector) -> np.ndarray:
    """Canonical 35-coefficient vector: multinomial weight times the generating entry."""
    return MULTINOMIAL_DEG4 * v.as_array()[V_INDEX_DEG4]


def to_quartic(v: GeneratingVector) -> QuarticForm:
    return QuarticForm.from_vector(quartic_coefficients(v))


class DenseQuartic:
    """Batched values and gradients of a fixed quartic given its 35 coefficients.

    The hot loops in the bound solvers evaluate thousands of points per
    iteration, so everything here is table-driven numpy over (n, 4) batches.
    """

    def __init__(self, coeffs: Sequence[float]):
        c = np.asarray(coeffs, dtype=np.float64)
        if c.shape != (35,):
            raise ValueError("need 35 coefficients")
        self.coeffs = c
        self._grad_tables = []
        for d in range(4):
            sel = _E4[:, d] > 0
            exps = _E4[sel].copy()
            factors = exps[:, d].astype(np.float64) * c[sel]
            exps[:, d] -= 1
            self._grad_tables.append((exps, factors))

    @staticmethod
    def _powers(X: np.ndarray) -> np.ndarray:
        pw = np.empty(X.shape + (5,), dtype=np.float64)
        pw[..., 0] = 1.0
        for k in range(1, 5):
            pw[..., k] = pw[..., k - 1] * X
        return pw

    @staticmethod
    def _monomials(pw: np.ndarray, exps: np.ndarray) -> np.ndarray:
        return (
            pw[:, 0, exps[:, 0]]
            * pw[:, 1, exps[:, 1]]
            * pw[:, 2, exps[:, 2]]
            * pw[:, 3, exps[:, 3]]
        )

    def values(self, X: np.ndarray) -> np.ndarray:
        pw = self._powers(np.asarray(X, dtype=np.float64))
        return self._monomials(pw, _E4) @ self.coeffs

    def gradients(self, X: np.ndarray) -> np.ndarray:
        pw = self._powers(np.asarray(X, dtype=np.float64))
        out = np.empty((X.shape[0], 4), dtype=np.float64)
        for d, (exps, factors) in enumerate(self._grad_tables):
            out[:, d] = self._monomials(pw, exps) @ factors
        return out


def gradient(v: GeneratingVector, x: PointLike) -> Vec4:
    """Gradient of the Hankel quartic at x."""
    pt = np.asarray(_as_point(x), dtype=np.float64)
    g = DenseQuartic(quartic_coefficients(v)).gradients(pt[None, :])[0]
    return Vec4(*g.tolist())
