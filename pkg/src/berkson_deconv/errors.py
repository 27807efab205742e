"""Exception hierarchy. Each class carries the CLI exit code it maps to."""

from __future__ import annotations


class DeconvError(Exception):
    """Base class for all library errors."""

    exit_code = 1
    code = "internal"

    def __init__(self, message: str, **context):
        super().__init__(message)
        self.message = message
        self.context = context


class InvalidScenario(DeconvError, ValueError):
    """A model, envelope or scenario violates its invariants."""

    exit_code = 2
    code = "invalid_scenario"


class ConfigError(DeconvError, ValueError):
    exit_code = 2
    code = "config"


class AdmissibilityError(DeconvError):
    """A request the theory refuses, e.g. h = 0 when rho^2 is infinite."""

    exit_code = 3
    code = "inadmissible"


class RegimeError(AdmissibilityError):
    """n too small for the asymptotic bandwidth formulas."""

    code = "regime"


class TruncationError(AdmissibilityError):
    code = "truncation"


class NumericError(DeconvError):
    """Quadrature or inversion failed a self-check."""

    exit_code = 1
    code = "numeric"


class GridError(NumericError):
    code = "grid"
