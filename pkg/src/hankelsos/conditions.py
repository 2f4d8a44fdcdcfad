"""Necessary PSD conditions, the binary-quartic threshold eta, and domain checks.

For the symmetric two-variable quartic  a*y1^4 + 4b*y1^3*y2 + 6c*y1^2*y2^2
+ 4b*y1*y2^3 + a*y2^4  the exact PSD threshold on the leading coefficient is
eta(b, c).  With the slice normalization v4 = 1, the restriction of the
Hankel quartic to x1 = x4 = 0 is such a form with a = 1, b = v5, c = v6;
eta(v5, v6) < 1 delimits the effective domain where the PSD/SOS thresholds
exist.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

from .core import GeneratingVector, Vec4

__all__ = [
    "eta",
    "in_effective_domain",
    "binary_quartic_psd",
    "check_necessary",
    "classify_degenerate",
    "ConditionReport",
    "InequalityRecord",
    "DegenerateClass",
    "NON_DEGENERATE",
    "TRIVIALLY_SOS",
    "NOT_PSD",
]

# Structural zero tests gate exact theorems, so the tolerance is absolute.
_ZERO_TOL = 1e-12


def eta(beta: float, gamma: float) -> float:
    """Exact PSD threshold for the symmetric binary quartic with coefficients (beta, gamma)."""
    b = abs(beta)
    if gamma <= b:
        return 4.0 * b - 3.0 * gamma
    # Here 9*gamma^2 - 8*beta^2 >= gamma^2 > 0.
    return (3.0 * gamma - math.sqrt(9.0 * gamma * gamma - 8.0 * beta * beta)) / 2.0


def in_effective_domain(v5: float, v6: float) -> bool:
    """Strict inequality eta(v5, v6) < 1; the boundary itself is excluded."""
    return eta(v5, v6) < 1.0


def binary_quartic_psd(alpha: float, beta: float, gamma: float) -> bool:
    """Whether alpha*y1^4 + 4*beta*y1^3*y2 + 6*gamma*y1^2*y2^2 + ... is PSD."""
    return alpha >= eta(beta, gamma)


@dataclass(frozen=True)
class InequalityRecord:
    """One necessary-condition check; the witness makes a failed check falsifiable.

    Evaluating the Hankel quartic at the witness point goes negative exactly
    when the inequality fails.  For the corollary record the inequality reads
    lhs <= rhs; all others read lhs >= rhs.
    """

    id: str
    lhs: float
    rhs: float
    satisfied: bool
    witness: Optional[Vec4] = None


@dataclass(frozen=True)
class ConditionReport:
    records: tuple[InequalityRecord, ...]

    @property
    def overall(self) -> bool:
        return all(r.satisfied for r in self.records)

    def record(self, record_id: str) -> InequalityRecord:
        for r in self.records:
            if r.id == record_id:
                return r
        raise KeyError(record_id)

    def to_json(self) -> str:
        return json.dumps(
            {
                "records": [
                    {
                        "id": r.id,
                        "lhs": r.lhs,
                        "rhs": r.rhs,
                        "satisfied": r.satisfied,
                        "witness": list(r.witness.as_tuple()) if r.witness else None,
                    }
                    for r in self.records
                ],
                "overall": self.overall,
            }
        )


def _basis(k: int) -> list[float]:
    e = [0.0, 0.0, 0.0, 0.0]
    e[k] = 1.0
    return e


def _pair_witness(k: int, offset: int, s: float) -> Vec4:
    # e_k + sigma*e_{k+offset} with sigma chosen against the sign of s, so the
    # quartic at the witness equals lhs - 4|s| whenever s != 0.
    x = _basis(k)
    x[k + offset] = -1.0 if s > 0 else 1.0
    return Vec4(*x)


def _eta_witness(beta: float, gamma: float) -> Vec4:
    # A zero/negative direction of the binary quartic at alpha = eta(beta, gamma),
    # mapped into the x2-x3 plane.
    if gamma <= abs(beta):
        y1, y2 = 1.0, (-1.0 if beta > 0 else 1.0)
    else:
        bar = eta(beta, gamma)
        ratio = beta / bar if bar != 0 else 0.0
        y1 = -ratio + math.sqrt(max(ratio * ratio - 1.0, 0.0))
        y2 = 1.0
    return Vec4(0.0, y1, y2, 0.0)


def check_necessary(v: GeneratingVector) -> ConditionReport:
    """Evaluate the four necessary-condition families on a generating vector.

    Reports every inequality instead of short-circuiting, so the CLI can show
    all failures at once.  When the vector is symmetric with v4 = v8 = 1, a
    corollary record eta(v5, v6) <= 1 is appended.
    """
    w = v.v
    records = []
    for i in (0, 4, 8, 12):
        lhs = w[i]
        records.append(
            InequalityRecord(f"(5)i{i}", lhs, 0.0, lhs >= 0.0, Vec4(*_basis(i // 4)))
        )
    for i in (0, 4, 8):
        lhs = w[i] + 6.0 * w[i + 2] + w[i + 4]
        s = w[i + 1] + w[i + 3]
        rhs = 4.0 * abs(s)
        records.append(InequalityRecord(f"(6)i{i}", lhs, rhs, lhs >= rhs, _pair_witness(i // 4, 1, s)))
    for i in (0, 4):
        lhs = w[i] + 6.0 * w[i + 4] + w[i + 8]
        s = w[i + 2] + w[i + 6]
        rhs = 4.0 * abs(s)
        records.append(InequalityRecord(f"(7)i{i}", lhs, rhs, lhs >= rhs, _pair_witness(i // 4, 2, s)))
    lhs = w[0] + 6.0 * w[6] + w[12]
    s = w[3] + w[9]
    rhs = 4.0 * abs(s)
    records.append(InequalityRecord("(8)", lhs, rhs, lhs >= rhs, _pair_witness(0, 3, s)))

    symmetric = all(abs(w[j] - w[12 - j]) <= _ZERO_TOL for j in range(6))
    normalized = abs(w[4] - 1.0) <= _ZERO_TOL and abs(w[8] - 1.0) <= _ZERO_TOL
    if symmetric and normalized:
        val = eta(w[5], w[6])
        records.append(
            InequalityRecord("corollary1", val, 1.0, val <= 1.0, _eta_witness(w[5], w[6]))
        )
    return ConditionReport(tuple(records))


NON_DEGENERATE = "NonDegenerate"
TRIVIALLY_SOS = "TriviallySOS"
NOT_PSD = "NotPSD"


@dataclass(frozen=True)
class DegenerateClass:
    tag: str
    violating_index: Optional[int] = None


def classify_degenerate(v: GeneratingVector) -> DegenerateClass:
    """Resolve the vanishing-key-element cases v0*v12 = 0 and v4*v8 = 0.

    If one of the four key elements vanishes, positive semi-definiteness
    forces v1..v11 to vanish as well, collapsing the quartic to
    v0*x1^4 + v12*x4^4.  The two hypotheses are treated symmetrically (the
    Hankel structure is reversal-symmetric).
    """
    w = v.v

    def is_zero(t: float) -> bool:
        return abs(t) <= _ZERO_TOL

    if not (is_zero(w[0]) or is_zero(w[12]) or is_zero(w[4]) or is_zero(w[8])):
        return DegenerateClass(NON_DEGENERATE)
    for j in range(1, 12):
        if not is_zero(w[j]):
            return DegenerateClass(NOT_PSD, violating_index=j)
    if w[0] >= -_ZERO_TOL and w[12] >= -_ZERO_TOL:
        return DegenerateClass(TRIVIALLY_SOS)
    return DegenerateClass(NOT_PSD)
