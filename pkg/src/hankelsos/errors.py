"""Shared exception types."""


class DomainError(ValueError):
    """Input lies outside an operation's mathematical domain."""


class OutsideEffectiveDomain(DomainError):
    """Slice point has eta(v5, v6) >= 1, so the PSD/SOS thresholds are undefined."""


class NonConvergence(RuntimeError):
    """An iterative solver exhausted its budget without meeting its tolerance."""


class InvalidCertificate(ValueError):
    """A certificate is structurally malformed (bad shapes or negative weights)."""
