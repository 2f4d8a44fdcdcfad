"""PSD threshold of the symmetric slice, by global search.

With v0 split off, the Hankel quartic reads f = v0*(x1^4 + x4^4) + r(x), so
the smallest PSD-making v0 equals the supremum of -r(x) over the set
x1^4 + x4^4 = 1.  That set is parameterized by (phi, x2, x3) with
(x1, x4) = (cos phi, sin phi) / (cos^4 phi + sin^4 phi)^(1/4), and the
supremum is located by multistart gradient ascent seeded from random starts
plus a coarse grid.  A projected-descent sphere minimizer and a brute-force
spherical grid provide the independent cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .conditions import eta, in_effective_domain
from .core import (
    DenseQuartic,
    GeneratingVector,
    SlicePoint,
    Vec4,
    assemble,
    quartic_coefficients,
)
from .errors import NonConvergence, OutsideEffectiveDomain

__all__ = ["SearchOptions", "BoundResult", "n0", "minimize_on_sphere", "grid_oracle_min"]

# Ascent iterates with |x2| or |x3| beyond this are abandoned: the maximizer
# escapes to infinity only as eta(v5, v6) -> 1, which the strict domain
# precondition excludes.
_COORD_CAP = 1e3

_ARMIJO = 1e-4
_MAX_BACKTRACKS = 60


@dataclass(frozen=True)
class SearchOptions:
    n_starts: int = 200
    seed: int = 0
    grad_tol: float = 1e-10
    max_iters_per_start: int = 5000
    grid_resolution: int = 60

    def __post_init__(self):
        if self.n_starts < 1:
            raise ValueError("n_starts must be >= 1")
        if self.grid_resolution < 8:
            raise ValueError("grid_resolution must be >= 8")


@dataclass(frozen=True)
class BoundResult:
    """Outcome of a bound computation.

    For the PSD threshold the witness attains the reported value on the set
    x1^4 + x4^4 = 1; for sphere minimization it lies on the unit sphere.  The
    SOS-threshold bisection reports no witness.
    """

    value: float
    witness: Optional[Vec4]
    starts_used: int
    converged: bool


class _SliceObjective:
    """h(phi, x2, x3) = -r(x) on the manifold x1^4 + x4^4 = 1."""

    def __init__(self, coeffs: np.ndarray):
        self._quartic = DenseQuartic(coeffs)

    def points(self, theta: np.ndarray) -> np.ndarray:
        phi = theta[:, 0]
        c = np.cos(phi)
        s = np.sin(phi)
        d = (c**4 + s**4) ** 0.25
        X = np.empty((theta.shape[0], 4))
        X[:, 0] = c / d
        X[:, 1] = theta[:, 1]
        X[:, 2] = theta[:, 2]
        X[:, 3] = s / d
        return X

    def values(self, theta: np.ndarray) -> np.ndarray:
        return -self._quartic.values(self.points(theta))

    def values_and_grads(self, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        phi = theta[:, 0]
        c = np.cos(phi)
        s = np.sin(phi)
        q = c**4 + s**4
        d = q**0.25
        X = np.empty((theta.shape[0], 4))
        X[:, 0] = c / d
        X[:, 1] = theta[:, 1]
        X[:, 2] = theta[:, 2]
        X[:, 3] = s / d
        vals = self._quartic.values(X)
        grads = self._quartic.gradients(X)
        dd = 0.25 * q**-0.75 * (4.0 * c * s * (s * s - c * c))
        dx1 = -s / d - c * dd / (d * d)
        dx4 = c / d - s * dd / (d * d)
        g = np.empty_like(theta)
        g[:, 0] = -(grads[:, 0] * dx1 + grads[:, 3] * dx4)
        g[:, 1] = -grads[:, 1]
        g[:, 2] = -grads[:, 2]
        return -vals, g


def _ascend(obj: _SliceObjective, theta: np.ndarray, opts: SearchOptions):
    """Gradient ascent with Armijo backtracking, batched over starts.

    Returns final parameters, values, and a per-start convergence flag.  The
    primary stop is the gradient tolerance; starts whose accepted steps stop
    improving at floating-point resolution are frozen early and still count
    as converged once the gradient is small (the value error is then
    quadratically smaller).  Starts hitting the coordinate cap are frozen as
    non-converged.
    """
    n = theta.shape[0]
    H, grad = obj.values_and_grads(theta)
    step = np.ones(n)
    stalls = np.zeros(n, dtype=np.int64)
    converged = np.zeros(n, dtype=bool)
    active = np.ones(n, dtype=bool)
    loose_tol = max(opts.grad_tol, 1e-6)
    for _ in range(opts.max_iters_per_start):
        ai = np.flatnonzero(active)
        if ai.size == 0:
            break
        gnorm = np.sqrt((grad[ai] ** 2).sum(axis=1))
        done = gnorm <= opts.grad_tol * np.maximum(1.0, np.abs(H[ai]))
        converged[ai[done]] = True
        active[ai[done]] = False
        keep = ~done
        ai = ai[keep]
        if ai.size == 0:
            break
        gnorm = gnorm[keep]
        gnorm_of = dict(zip(ai.tolist(), gnorm.tolist()))
        h_before = H[ai].copy()
        alpha = step[ai].copy()
        pending = np.arange(ai.size)
        for _bt in range(_MAX_BACKTRACKS):
            idx = ai[pending]
            trial = theta[idx] + alpha[pending, None] * grad[idx]
            trial_h = obj.values(trial)
            ok = trial_h >= H[idx] + _ARMIJO * alpha[pending] * gnorm[pending] ** 2
            if ok.any():
                acc = idx[ok]
                theta[acc] = trial[ok]
                H[acc] = trial_h[ok]
                step[acc] = np.minimum(alpha[pending][ok] * 2.0, 1e8)
            pending = pending[~ok]
            if pending.size == 0:
                break
            alpha[pending] *= 0.5
        exhausted = np.zeros(n, dtype=bool)
        if pending.size:
            exhausted[ai[pending]] = True
        improved = H[ai] - h_before
        tiny = improved <= 16.0 * np.finfo(float).eps * np.maximum(1.0, np.abs(H[ai]))
        stalls[ai[tiny]] += 1
        stalls[ai[~tiny]] = 0
        for row in ai[(stalls[ai] >= 2)].tolist():
            exhausted[row] = True
        frozen = np.flatnonzero(exhausted & active)
        if frozen.size:
            ok_grad = np.asarray(
                [gnorm_of[r] <= loose_tol * max(1.0, abs(H[r])) for r in frozen.tolist()]
            )
            converged[frozen[ok_grad]] = True
            active[frozen] = False
        capped = active & (
            (np.abs(theta[:, 1]) > _COORD_CAP) | (np.abs(theta[:, 2]) > _COORD_CAP)
        )
        active &= ~capped
        act = np.flatnonzero(active)
        if act.size:
            H[act], grad[act] = obj.values_and_grads(theta[act])
    return theta, H, converged


def _random_starts(rng: np.random.Generator, n: int, spread: float) -> np.ndarray:
    theta = np.empty((n, 3))
    theta[:, 0] = rng.uniform(0.0, 2.0 * math.pi, size=n)
    scales = np.asarray([0.5, 1.0, 2.0, 4.0])[np.arange(n) % 4] * spread
    theta[:, 1:] = rng.normal(size=(n, 2)) * scales[:, None]
    return theta


def _grid_starts(obj: _SliceObjective, opts: SearchOptions, spread: float, top: int = 8):
    phis = np.linspace(0.0, 2.0 * math.pi, opts.grid_resolution, endpoint=False)
    side = np.linspace(-10.0 * spread, 10.0 * spread, 21)
    pp, aa, bb = np.meshgrid(phis, side, side, indexing="ij")
    theta = np.column_stack([pp.ravel(), aa.ravel(), bb.ravel()])
    vals = obj.values(theta)
    order = np.argsort(vals)[::-1][:top]
    return theta[order]


def n0(point: SlicePoint, opts: Optional[SearchOptions] = None) -> BoundResult:
    """Smallest v0 making the symmetric Hankel tensor PSD, by global ascent.

    The returned value is attained by the witness, so it is always a valid
    lower bound on the true threshold; the ascent and grid seeding make it
    sharp in practice.  Search rounds escalate the start spread whenever the
    winner lands near the sampled edge, since the maximizer scale grows with
    the slice coefficients.
    """
    opts = opts or SearchOptions()
    if not in_effective_domain(point.v5, point.v6):
        raise OutsideEffectiveDomain(
            f"eta(v5, v6) = {eta(point.v5, point.v6):.6g} >= 1 at {point.as_tuple()}"
        )
    obj = _SliceObjective(quartic_coefficients(assemble(point, 0.0)))
    rng = np.random.default_rng(opts.seed)

    best_theta = np.zeros((0, 3))
    best_h = np.zeros(0)
    best_conv = np.zeros(0, dtype=bool)
    starts_used = 0
    spread = 1.0
    for _ in range(3):
        theta0 = np.vstack([_random_starts(rng, opts.n_starts, spread), _grid_starts(obj, opts, spread)])
        starts_used += theta0.shape[0]
        theta, h, conv = _ascend(obj, theta0, opts)
        best_theta = np.vstack([best_theta, theta])
        best_h = np.concatenate([best_h, h])
        best_conv = np.concatenate([best_conv, conv])
        win = best_theta[int(np.argmax(best_h))]
        if max(abs(win[1]), abs(win[2])) <= 7.0 * spread:
            break
        spread *= 4.0
    if not best_conv.any():
        raise NonConvergence("no ascent start met the gradient tolerance")
    k = int(np.argmax(best_h))
    witness = obj.points(best_theta[k : k + 1])[0]
    return BoundResult(
        value=float(best_h[k]),
        witness=Vec4(*witness.tolist()),
        starts_used=starts_used,
        converged=bool(best_conv[k]),
    )


def _structured_sphere_starts() -> np.ndarray:
    rows = []
    for k in range(4):
        e = np.zeros(4)
        e[k] = 1.0
        rows.append(e)
    for i in range(4):
        for j in range(i + 1, 4):
            for sign in (1.0, -1.0):
                e = np.zeros(4)
                e[i] = 1.0
                e[j] = sign
                rows.append(e / math.sqrt(2.0))
    signs = [(1.0, a, b, c) for a in (1.0, -1.0) for b in (1.0, -1.0) for c in (1.0, -1.0)]
    rows.extend(np.asarray(s) / 2.0 for s in signs)
    return np.asarray(rows)


def _descend_sphere(quartic: DenseQuartic, X: np.ndarray, opts: SearchOptions):
    """Projected gradient descent with Armijo backtracking on the unit sphere.

    Same stall handling as the slice ascent: starts that stop making
    float-representable progress freeze early, counting as converged when the
    tangential gradient is already small.
    """
    n = X.shape[0]
    X = X / np.linalg.norm(X, axis=1, keepdims=True)
    F = quartic.values(X)
    step = np.ones(n)
    stalls = np.zeros(n, dtype=np.int64)
    converged = np.zeros(n, dtype=bool)
    active = np.ones(n, dtype=bool)
    loose_tol = max(opts.grad_tol, 1e-6)
    for _ in range(opts.max_iters_per_start):
        ai = np.flatnonzero(active)
        if ai.size == 0:
            break
        G = quartic.gradients(X[ai])
        T = G - (G * X[ai]).sum(axis=1, keepdims=True) * X[ai]
        tnorm = np.sqrt((T**2).sum(axis=1))
        done = tnorm <= opts.grad_tol * np.maximum(1.0, np.abs(F[ai]))
        converged[ai[done]] = True
        active[ai[done]] = False
        keep = ~done
        ai = ai[keep]
        if ai.size == 0:
            break
        T = T[keep]
        tnorm = tnorm[keep]
        tnorm_of = dict(zip(ai.tolist(), tnorm.tolist()))
        f_before = F[ai].copy()
        alpha = step[ai].copy()
        pending = np.arange(ai.size)
        for _bt in range(_MAX_BACKTRACKS):
            sub = pending
            idx = ai[sub]
            trial = X[idx] - alpha[sub, None] * T[sub]
            trial /= np.linalg.norm(trial, axis=1, keepdims=True)
            trial_f = quartic.values(trial)
            ok = trial_f <= F[idx] - _ARMIJO * alpha[sub] * tnorm[sub] ** 2
            if ok.any():
                acc = idx[ok]
                X[acc] = trial[ok]
                F[acc] = trial_f[ok]
                step[acc] = np.minimum(alpha[sub][ok] * 2.0, 1e8)
            pending = sub[~ok]
            if pending.size == 0:
                break
            alpha[pending] *= 0.5
        exhausted = np.zeros(n, dtype=bool)
        if pending.size:
            exhausted[ai[pending]] = True
        improved = f_before - F[ai]
        tiny = improved <= 16.0 * np.finfo(float).eps * np.maximum(1.0, np.abs(F[ai]))
        stalls[ai[tiny]] += 1
        stalls[ai[~tiny]] = 0
        for row in ai[(stalls[ai] >= 2)].tolist():
            exhausted[row] = True
        frozen = np.flatnonzero(exhausted & active)
        if frozen.size:
            ok_grad = np.asarray(
                [tnorm_of[r] <= loose_tol * max(1.0, abs(F[r])) for r in frozen.tolist()]
            )
            converged[frozen[ok_grad]] = True
            active[frozen] = False
    return X, F, converged


def minimize_on_sphere(v: GeneratingVector, opts: Optional[SearchOptions] = None) -> BoundResult:
    """Approximate global minimum of the Hankel quartic over the unit sphere."""
    opts = opts or SearchOptions()
    quartic = DenseQuartic(quartic_coefficients(v))
    rng = np.random.default_rng(opts.seed)
    randoms = rng.normal(size=(opts.n_starts, 4))
    X0 = np.vstack([randoms, _structured_sphere_starts()])
    X, F, converged = _descend_sphere(quartic, X0, opts)
    if not converged.any():
        raise NonConvergence("no descent start met the gradient tolerance")
    k = int(np.argmin(F))
    return BoundResult(
        value=float(F[k]),
        witness=Vec4(*X[k].tolist()),
        starts_used=X0.shape[0],
        converged=bool(converged[k]),
    )


def grid_oracle_min(v: GeneratingVector, resolution: int) -> float:
    """Brute-force sphere minimum: product angular grid plus one descent polish.

    Test-side oracle only; its cost grows with resolution cubed.
    """
    if resolution < 8:
        raise ValueError("resolution must be >= 8")
    quartic = DenseQuartic(quartic_coefficients(v))
    psi1 = np.linspace(0.0, math.pi, resolution)
    psi2 = np.linspace(0.0, math.pi, resolution)
    psi3 = np.linspace(0.0, 2.0 * math.pi, resolution, endpoint=False)
    a, b, c = np.meshgrid(psi1, psi2, psi3, indexing="ij")
    a = a.ravel()
    b = b.ravel()
    c = c.ravel()
    X = np.empty((a.size, 4))
    X[:, 0] = np.cos(a)
    X[:, 1] = np.sin(a) * np.cos(b)
    X[:, 2] = np.sin(a) * np.sin(b) * np.cos(c)
    X[:, 3] = np.sin(a) * np.sin(b) * np.sin(c)
    vals = quartic.values(X)
    k = int(np.argmin(vals))
    best_grid = float(vals[k])
    opts = SearchOptions(n_starts=1, grid_resolution=resolution)
    _, F, _ = _descend_sphere(quartic, X[k : k + 1].copy(), opts)
    return min(best_grid, float(F[0]))
