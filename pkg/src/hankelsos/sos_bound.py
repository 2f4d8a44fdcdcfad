"""SOS membership via Gram-matrix semidefinite feasibility, and the SOS threshold.

A quartic f is a sum of squares exactly when some 10x10 PSD matrix G over
the degree-2 monomial basis z satisfies f = z^T G z.  Matching coefficients
pins 35 affine constraints on G; feasibility is decided by alternating
projections between the PSD cone and that affine set.  The smallest
SOS-making v0 is then a bisection on v0, bracketed from below by the PSD
threshold (SOS implies PSD) and from above by geometric growth.

Each product of two basis monomials is a distinct quartic monomial, so the
constraint groups partition the Gram entries and the affine projection
reduces to a per-group shift.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import psd_bound
from .certificates import SosDecomposition, WeightedSquare
from .conditions import eta, in_effective_domain
from .core import (
    MONOMIAL_INDEX_DEG4,
    MONOMIALS_DEG2,
    PAIR_ALPHA_DEG2,
    QuarticForm,
    SlicePoint,
    assemble,
    quartic_coefficients,
)
from .errors import NonConvergence, OutsideEffectiveDomain

__all__ = [
    "MONOMIAL_BASIS",
    "ConstraintSystem",
    "FeasResult",
    "FEASIBLE",
    "UNDETERMINED",
    "BisectionOptions",
    "build_constraints",
    "gram_to_quartic",
    "jacobi_eigen",
    "project_psd",
    "sos_feasible",
    "extract_decomposition",
    "m0",
    "gram_to_json",
    "gram_from_json",
]

#: The 10 degree-2 monomials indexing Gram rows/columns, in the shared order.
MONOMIAL_BASIS = MONOMIALS_DEG2

# Upper-triangle pair tables: pair (i, j), i <= j, feeds exactly one quartic
# coefficient, with weight 2 off the diagonal (G_ij + G_ji).
_PAIR_I, _PAIR_J = np.triu_indices(10)
_PAIR_ALPHA = PAIR_ALPHA_DEG2[_PAIR_I, _PAIR_J]
_PAIR_WEIGHT = np.where(_PAIR_I == _PAIR_J, 1.0, 2.0)
_GROUP_WEIGHT_SUM = np.bincount(_PAIR_ALPHA, weights=_PAIR_WEIGHT, minlength=35)

_PAIRS_BY_MONOMIAL = tuple(
    tuple(
        (int(i), int(j))
        for i, j, a in zip(_PAIR_I, _PAIR_J, _PAIR_ALPHA)
        if a == alpha
    )
    for alpha in range(35)
)


@dataclass(frozen=True)
class ConstraintSystem:
    """Per-monomial Gram constraints sum_{(i,j)} G_ij = c_alpha (symmetric counting)."""

    targets: np.ndarray
    pairs_by_monomial: tuple = _PAIRS_BY_MONOMIAL

    def constraint_values(self, G: np.ndarray) -> np.ndarray:
        u = G[_PAIR_I, _PAIR_J]
        return np.bincount(_PAIR_ALPHA, weights=_PAIR_WEIGHT * u, minlength=35)

    def residual(self, G: np.ndarray) -> float:
        return float(np.linalg.norm(self.constraint_values(G) - self.targets))

    def project_affine(self, G: np.ndarray) -> np.ndarray:
        """Frobenius-nearest symmetric matrix meeting every constraint.

        The pairs partition across constraints, so the normal equations of
        the 35x55 constraint operator are diagonal and the projection is a
        uniform shift within each group.
        """
        vals = self.constraint_values(G)
        lam = (self.targets - vals) / _GROUP_WEIGHT_SUM
        out = G.copy()
        out[_PAIR_I, _PAIR_J] += lam[_PAIR_ALPHA]
        out[_PAIR_J, _PAIR_I] = out[_PAIR_I, _PAIR_J]
        return out


def build_constraints(q: QuarticForm) -> ConstraintSystem:
    return ConstraintSystem(targets=q.vector())


def gram_to_quartic(G: np.ndarray) -> QuarticForm:
    """The quartic z^T G z."""
    from .core import gram_to_quartic_vector

    return QuarticForm.from_vector(gram_to_quartic_vector(G))


def _check_symmetric(G: np.ndarray) -> np.ndarray:
    A = np.asarray(G, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    scale = 1.0 + (float(np.abs(A).max()) if A.size else 0.0)
    if float(np.abs(A - A.T).max()) > 1e-14 * scale:
        raise ValueError("matrix must be symmetric to 1e-14")
    return (A + A.T) / 2.0


def jacobi_eigen(G: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns eigenvalues ascending and the matching orthogonal eigenvectors as
    columns, with G = V diag(w) V^T.  Raises NonConvergence after 100 sweeps.
    """
    A = _check_symmetric(G).copy()
    n = A.shape[0]
    V = np.eye(n)
    threshold = 1e-12 * (1.0 + float(np.linalg.norm(A)))
    # Entries this small cannot lift the off-diagonal norm above threshold
    # even if every pair carries one, so rotating on them is wasted work.
    skip = threshold / (2.0 * n)
    for _sweep in range(100):
        off = math.sqrt(max(float((A * A).sum() - (np.diag(A) ** 2).sum()), 0.0))
        if off <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= skip:
                    continue
                gap = A[q, q] - A[p, p]
                if abs(apq) < 1e-36 * abs(gap):
                    t = apq / gap
                else:
                    ratio = gap / (2.0 * apq)
                    t = math.copysign(1.0, ratio) / (abs(ratio) + math.sqrt(ratio * ratio + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p = A[:, p].copy()
                col_q = A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = A[q, p] = 0.0
                v_p = V[:, p].copy()
                v_q = V[:, q].copy()
                V[:, p] = c * v_p - s * v_q
                V[:, q] = s * v_p + c * v_q
    else:
        raise NonConvergence("Jacobi sweeps exhausted without reaching tolerance")
    w = np.diag(A).copy()
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def project_psd(G: np.ndarray) -> np.ndarray:
    """Frobenius-nearest PSD matrix: clamp negative eigenvalues to zero."""
    w, V = jacobi_eigen(G)
    R = (V * np.maximum(w, 0.0)) @ V.T
    return (R + R.T) / 2.0


FEASIBLE = "feasible"
UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class FeasResult:
    status: str
    gram: Optional[np.ndarray]
    residual: float
    iterations: int

    @property
    def is_feasible(self) -> bool:
        return self.status == FEASIBLE


def _clamp_psd_fast(G: np.ndarray) -> tuple[np.ndarray, float]:
    # LAPACK eigendecomposition for the feasibility hot loop; identical
    # projection to project_psd, which stays the checked module surface.
    w, V = np.linalg.eigh(G)
    violation = max(0.0, -float(w[0]))
    R = (V * np.maximum(w, 0.0)) @ V.T
    return (R + R.T) / 2.0, violation


def sos_feasible(
    q: QuarticForm,
    tol: float = 1e-8,
    max_iter: int = 50000,
    initial_gram: Optional[np.ndarray] = None,
) -> FeasResult:
    """Decide SOS membership by alternating projections.

    Feasible requires both the PSD violation of the affine-feasible iterate
    and the constraint residual of the PSD iterate below tol * scale with
    scale = 1 + max |c|.  Undetermined is a value, not an error: it is
    returned at the iteration cap, or as soon as the convergence rate over a
    100-iteration window shows the cap cannot be met (the two-set gap has
    plateaued above tolerance).
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    system = build_constraints(q)
    scale = 1.0 + float(np.abs(system.targets).max())
    band = tol * scale
    G = np.zeros((10, 10)) if initial_gram is None else _check_symmetric(initial_gram)
    metric_prev = math.inf
    metric_window = math.inf
    for it in range(1, max_iter + 1):
        G = system.project_affine(G)
        P, violation = _clamp_psd_fast(G)
        residual = system.residual(P)
        if violation <= band and residual <= band:
            return FeasResult(FEASIBLE, P, residual, it)
        G = P
        metric_window = min(metric_window, max(violation, residual))
        if it % 100 == 0:
            if it >= 300:
                rate = metric_window / metric_prev if metric_prev > 0 else 0.0
                if rate >= 1.0:
                    return FeasResult(UNDETERMINED, None, residual, it)
                remaining = (max_iter - it) / 100.0
                projected = math.log(metric_window) + remaining * math.log(rate)
                if projected > math.log(10.0 * band):
                    return FeasResult(UNDETERMINED, None, residual, it)
            metric_prev = metric_window
            metric_window = math.inf
    return FeasResult(UNDETERMINED, None, residual, max_iter)


def extract_decomposition(G: np.ndarray) -> SosDecomposition:
    """Weighted squares from an (approximately) PSD Gram matrix.

    Eigenvalues below the clamp floor are dropped; each kept eigenpair
    becomes one square with the eigenvalue as weight.
    """
    w, V = jacobi_eigen(G)
    floor = 1e-14 * (1.0 + abs(float(np.trace(np.asarray(G)))))
    squares = []
    for k in range(len(w) - 1, -1, -1):
        if w[k] > floor:
            squares.append(WeightedSquare(float(w[k]), tuple(V[:, k].tolist())))
    if not squares:
        squares.append(WeightedSquare(0.0, (0.0,) * 10))
    return SosDecomposition(tuple(squares))


@dataclass(frozen=True)
class BisectionOptions:
    rel_tol: float = 1e-4
    feas_tol: float = 1e-8
    max_iter: int = 50000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.feas_tol > 0 and self.max_iter >= 1):
            raise ValueError("bisection options must be positive")


_IDX_X1_4 = MONOMIAL_INDEX_DEG4[(4, 0, 0, 0)]
_IDX_X4_4 = MONOMIAL_INDEX_DEG4[(0, 0, 0, 4)]


def m0(
    point: SlicePoint,
    opts: Optional[BisectionOptions] = None,
    search: Optional[psd_bound.SearchOptions] = None,
    n0_hint: Optional[psd_bound.BoundResult] = None,
) -> psd_bound.BoundResult:
    """Smallest v0 making the symmetric Hankel tensor SOS, by bisection on v0.

    The lower bracket starts just under the PSD threshold (SOS implies PSD);
    the upper bracket doubles until feasible.  Undetermined feasibility
    counts as infeasible, biasing the result upward by at most the
    feasibility band.  A caller that already holds the PSD threshold can
    pass it as n0_hint to skip recomputing it.
    """
    opts = opts or BisectionOptions()
    if not in_effective_domain(point.v5, point.v6):
        raise OutsideEffectiveDomain(
            f"eta(v5, v6) = {eta(point.v5, point.v6):.6g} >= 1 at {point.as_tuple()}"
        )
    lower_res = n0_hint if n0_hint is not None else psd_bound.n0(point, search)
    base = quartic_coefficients(assemble(point, 0.0))
    state = {"warm": None, "calls": 0}

    def feasible(v0: float) -> bool:
        targets = base.copy()
        targets[_IDX_X1_4] = v0
        targets[_IDX_X4_4] = v0
        res = sos_feasible(
            QuarticForm.from_vector(targets),
            tol=opts.feas_tol,
            max_iter=opts.max_iter,
            initial_gram=state["warm"],
        )
        state["calls"] += 1
        if res.is_feasible:
            state["warm"] = res.gram
        return res.is_feasible

    n0_value = lower_res.value
    lo = n0_value - max(1e-6, 1e-6 * abs(n0_value))
    hi = max(1.0, 2.0 * n0_value)
    cap = 1e9 * max(1.0, max(abs(t) for t in point.as_tuple()))
    while not feasible(hi):
        hi *= 2.0
        if hi > cap:
            raise NonConvergence(f"no feasible v0 found up to {cap:g}")
    while hi - lo > opts.rel_tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return psd_bound.BoundResult(
        value=0.5 * (lo + hi),
        witness=None,
        starts_used=state["calls"],
        converged=True,
    )


def gram_to_json(G: np.ndarray) -> str:
    """Row-major JSON serialization of a 10x10 Gram matrix."""
    A = _check_symmetric(G)
    if A.shape != (10, 10):
        raise ValueError("Gram matrix must be 10x10")
    return json.dumps(A.ravel().tolist())


def gram_from_json(text: str) -> np.ndarray:
    vals = np.asarray(json.loads(text), dtype=np.float64)
    if vals.shape != (100,):
        raise ValueError("Gram JSON must hold 100 numbers, row-major")
    return _check_symmetric(vals.reshape(10, 10))
