"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, FitRejected -> 3,
DomainError -> 4.
"""


class DomainError(ValueError):
    """Argument outside the domain where a formula is valid."""


class LasingError(DomainError):
    """Blue-detuned cooperativity at or beyond the phonon lasing threshold (C >= 1)."""


class FitRejected(RuntimeError):
    """A trace did not support the requested fit (no feature, too few points, ...)."""


class ScanRejected(FitRejected):
    """A filter scan without a usable pump/sideband peak pair."""


class ConfigError(ValueError):
    """Invalid run configuration."""
