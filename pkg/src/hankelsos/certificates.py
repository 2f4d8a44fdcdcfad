"""Critical-value certificates for PNS-free slice points.

A slice point P is PNS-free once three things are exhibited: a value M such
that the Hankel quartic with v0 = M is a sum of squares, the explicit
weighted-square decomposition, and a zero x-bar of that quartic with
x1^2 + x4^2 > 0.  Any v0 below M then fails PSD at x-bar, pinning both
thresholds to M.  This module builds the decompositions known in closed
form (the segment through (1,1,0,0,0) and the planar cone v2 >= v6 >= 1),
evaluates the closed-form critical values on the ray v2 <= 0, v6 = 0 and at
the isolated point (1,0,0,0,0), and verifies arbitrary certificates
numerically.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    MONOMIALS_DEG2,
    QuarticForm,
    SlicePoint,
    Vec4,
    assemble,
    evaluate,
    gram_to_quartic_vector,
    to_quartic,
)
from .errors import DomainError, InvalidCertificate

__all__ = [
    "WeightedSquare",
    "SosDecomposition",
    "CriticalCertificate",
    "CertificateReport",
    "expand_squares",
    "verify_certificate",
    "segment_certificate",
    "cone_certificate",
    "cone_theta_min",
    "ray_critical_value",
    "point_a_critical_value",
    "certificate_to_json",
    "certificate_from_json",
]


@dataclass(frozen=True)
class WeightedSquare:
    """One term weight * (q . z)^2 with q over the 10 degree-2 monomials."""

    weight: float
    form: tuple[float, ...]

    def __post_init__(self):
        w = float(self.weight)
        coeffs = tuple(float(t) for t in self.form)
        if len(coeffs) != len(MONOMIALS_DEG2):
            raise InvalidCertificate("square form needs 10 coefficients")
        if not (math.isfinite(w) and all(math.isfinite(t) for t in coeffs)):
            raise InvalidCertificate("square entries must be finite")
        if w < 0.0:
            raise InvalidCertificate(f"square weight must be nonnegative, got {w}")
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "form", coeffs)


@dataclass(frozen=True)
class SosDecomposition:
    squares: tuple[WeightedSquare, ...]

    def __post_init__(self):
        squares = tuple(self.squares)
        if not squares:
            raise InvalidCertificate("decomposition needs at least one square")
        object.__setattr__(self, "squares", squares)


@dataclass(frozen=True)
class CriticalCertificate:
    """(P, M, decomposition, minimizer) witnessing that P is PNS-free.

    Nondegeneracy of the minimizer is checked by verify_certificate, not at
    construction, so that broken certificates can be represented and shown
    to fail.
    """

    point: SlicePoint
    critical_value: float
    decomposition: SosDecomposition
    minimizer: Vec4


def expand_squares(dec: SosDecomposition) -> QuarticForm:
    """Expand sum_k weight_k * (q_k . z)^2 into the 35-coefficient quartic."""
    G = np.zeros((10, 10))
    for sq in dec.squares:
        f = np.asarray(sq.form)
        G += sq.weight * np.outer(f, f)
    return QuarticForm.from_vector(gram_to_quartic_vector(G))


@dataclass(frozen=True)
class CheckRecord:
    name: str
    passed: bool
    value: float
    bound: float


@dataclass(frozen=True)
class CertificateReport:
    checks: tuple[CheckRecord, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> str:
        return json.dumps(
            {
                "checks": [
                    {"name": c.name, "passed": c.passed, "value": c.value, "bound": c.bound}
                    for c in self.checks
                ],
                "passed": self.passed,
            }
        )


def verify_certificate(cert: CriticalCertificate, tol: float) -> CertificateReport:
    """Check a certificate: expansion matches, the minimizer is a zero, and
    the minimizer has weight on x1/x4.

    Weight nonnegativity and shapes are enforced by the types themselves.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    target = to_quartic(assemble(cert.point, cert.critical_value))
    tv = target.vector()
    scale = 1.0 + float(np.abs(tv).max())
    got = expand_squares(cert.decomposition).vector()
    coeff_dev = float(np.abs(got - tv).max())
    xbar = cert.minimizer
    norm4 = float(sum(t * t for t in xbar.as_tuple())) ** 2
    fval = abs(evaluate(assemble(cert.point, cert.critical_value), xbar))
    key_mass = xbar.x1 * xbar.x1 + xbar.x4 * xbar.x4
    return CertificateReport(
        (
            CheckRecord("expansion_matches", coeff_dev <= tol * scale, coeff_dev, tol * scale),
            CheckRecord("minimizer_is_zero", fval <= tol * norm4 * scale, fval, tol * norm4 * scale),
            CheckRecord("minimizer_nondegenerate", key_mass > tol, key_mass, tol),
        )
    )


def _clean_squares(raw, magnitude: float) -> SosDecomposition:
    # Clamp rounding-level negative weights, drop zero squares, keep order.
    ntol = 1e-9 * max(1.0, magnitude)
    squares = []
    for weight, form in raw:
        if weight < -ntol:
            raise DomainError(f"negative square weight {weight}")
        if weight <= ntol:
            continue
        squares.append(WeightedSquare(weight, tuple(form)))
    if not squares:
        raise DomainError("all square weights vanished")
    return SosDecomposition(tuple(squares))


# Degree-2 basis positions, for readability below:
# 0: x1^2  1: x1x2  2: x1x3  3: x1x4  4: x2^2  5: x2x3  6: x2x4  7: x3^2  8: x3x4  9: x4^2


def segment_certificate(t: float) -> CriticalCertificate:
    """Certificate for P = (1, 1, t, t, t), t in [-1, 1]: critical value 1.

    The quartic equals (1+t)/2 * (x1+x2+x3+x4)^4 + (1-t)/2 * (x1-x2+x3-x4)^4
    and vanishes at (1, 0, -1, 0).
    """
    t = float(t)
    if not math.isfinite(t) or abs(t) > 1.0:
        raise DomainError("segment parameter must lie in [-1, 1]")
    plus = (1.0, 2.0, 2.0, 2.0, 1.0, 2.0, 2.0, 1.0, 2.0, 1.0)
    minus = (1.0, -2.0, 2.0, -2.0, 1.0, -2.0, 2.0, 1.0, -2.0, 1.0)
    dec = _clean_squares(
        [((1.0 + t) / 2.0, plus), ((1.0 - t) / 2.0, minus)],
        magnitude=1.0,
    )
    return CriticalCertificate(
        point=SlicePoint(1.0, 1.0, t, t, t),
        critical_value=1.0,
        decomposition=dec,
        minimizer=Vec4(1.0, 0.0, -1.0, 0.0),
    )


def cone_theta_min(b: float) -> float:
    """Smallest admissible cone parameter theta for a given v6 = b >= 1.

    This is the largest real root of v2(theta) - b = 0, so below it the
    parameterized v2 would drop under v6.
    """
    b = float(b)
    if not math.isfinite(b) or b < 1.0:
        raise DomainError("cone requires v6 = b >= 1")
    return (b - 1.0) ** (1.0 / 3.0) * (b + 1.0) ** (2.0 / 3.0) + (b - 1.0) ** (2.0 / 3.0) * (
        b + 1.0
    ) ** (1.0 / 3.0) - 2.0 * b + 1.0


def cone_certificate(b: float, theta: float) -> CriticalCertificate:
    """Certificate for the planar cone point P = (v2, b, 0, 0, 0), v2 >= b >= 1.

    The pair (b, theta) parameterizes v2 and the critical value directly;
    the map theta -> v2 is never inverted.
    """
    b = float(b)
    theta = float(theta)
    if not (math.isfinite(b) and math.isfinite(theta)):
        raise DomainError("cone parameters must be finite")
    tmin = cone_theta_min(b)
    if theta < tmin - 1e-9 * max(1.0, abs(tmin)):
        raise DomainError(f"theta = {theta} below admissible minimum {tmin}")
    w = theta + 3.0 * b - 1.0
    v2 = w * (theta * theta + (3.0 * b - 2.0) * theta - 3.0 * b + 4.0)
    den = 3.0 * theta * theta + (10.0 * b - 6.0) * theta + 3.0 * b * b - 10.0 * b + 9.0
    M = w * w * den
    if M <= 0.0:
        raise DomainError("nonpositive critical value; parameters outside the cone")
    a1 = -(theta * theta + (4.0 * b - 2.0) * theta + 3.0 * b * b - 4.0 * b + 1.0)
    a2 = 2.0 * (theta * theta + (4.0 * b - 2.0) * theta + b * b - 4.0 * b + 4.0) / den
    raw = [
        (1.0 / M, (M, 0.0, 2.0 * v2, 0.0, 0.0, 0.0, 0.0, a1, 0.0, 0.0)),
        (1.0 / M, (0.0, 0.0, 0.0, 0.0, a1, 0.0, 2.0 * v2, 0.0, 0.0, M)),
        (a2, (0.0, 0.0, w, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0)),
        (a2, (0.0, 0.0, 0.0, 0.0, 1.0, 0.0, w, 0.0, 0.0, 0.0)),
        (6.0 / b, (0.0, 1.0, 0.0, b, 0.0, b, 0.0, 0.0, 1.0, 0.0)),
        (6.0 * (b * b - 1.0) / b, (0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0)),
        (6.0 * (v2 - b), (0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)),
        (6.0 * (v2 - b), (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0)),
    ]
    dec = _clean_squares(raw, magnitude=max(1.0, M, abs(v2)))
    return CriticalCertificate(
        point=SlicePoint(v2, b, 0.0, 0.0, 0.0),
        critical_value=M,
        decomposition=dec,
        minimizer=Vec4(1.0, 0.0, -w, 0.0),
    )


def ray_critical_value(rho: float) -> float:
    """Critical value at P = (-rho, 0, 0, 0, 0) for rho >= 0, in closed form.

    The value is the real root w of w^3 - 3*t3*w - 54*t1 = 0 shifted by a
    quadratic in rho.  For small rho the Cardano radicand t2 is nonnegative
    and the cube-root form applies directly; past rho = 2*sqrt(5) - 2 the
    cubic has three real roots and the trigonometric form picks the branch
    that continues the principal complex evaluation.
    """
    rho = float(rho)
    if not math.isfinite(rho) or rho < 0.0:
        raise DomainError("ray parameter must satisfy rho >= 0")
    t1 = (
        -(rho**6)
        + 272.0 * rho**5
        + 12608.0 * rho**4
        + 204032.0 * rho**3
        + 1558528.0 * rho**2
        + 5750784.0 * rho
        + 8290304.0
    )
    t2 = -((rho + 6.0) ** 2) * (rho + 4.0) ** 3 * (rho * rho + 4.0 * rho - 16.0) ** 3
    t3 = 9.0 * (rho + 8.0) * (rho**3 + 152.0 * rho**2 + 1728.0 * rho + 5120.0)
    shift = 6.0 * rho * rho + 138.0 * rho + 609.0
    if t2 >= 0.0:
        u = np.cbrt(t1 + 32.0 * math.sqrt(t2))
        return 3.0 * u + t3 / (3.0 * u) + shift
    arg = 27.0 * t1 / t3**1.5
    w = 2.0 * math.sqrt(t3) * math.cos(math.acos(max(-1.0, min(1.0, arg))) / 3.0)
    return w + shift


def point_a_critical_value() -> float:
    """Critical value at P = (1, 0, 0, 0, 0), about 1421.92."""
    u = np.cbrt(3906351.0 + 9120.0 * math.sqrt(57.0))
    return 477.0 + 3.0 * u + 74403.0 / u


def certificate_to_json(cert: CriticalCertificate) -> str:
    return json.dumps(
        {
            "P": list(cert.point.as_tuple()),
            "M": cert.critical_value,
            "squares": [
                {"weight": sq.weight, "form": list(sq.form)} for sq in cert.decomposition.squares
            ],
            "minimizer": list(cert.minimizer.as_tuple()),
        }
    )


def certificate_from_json(text: str) -> CriticalCertificate:
    try:
        raw = json.loads(text)
        point = SlicePoint.from_sequence(raw["P"])
        value = float(raw["M"])
        squares = tuple(
            WeightedSquare(sq["weight"], tuple(sq["form"])) for sq in raw["squares"]
        )
        minimizer = Vec4.from_sequence(raw["minimizer"])
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise InvalidCertificate(f"malformed certificate payload: {exc}") from exc
    return CriticalCertificate(
        point=point,
        critical_value=value,
        decomposition=SosDecomposition(squares),
        minimizer=minimizer,
    )
