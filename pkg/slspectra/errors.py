""" Exception hierarchy shared by every slspectra module """

from typing import Optional


class SLSpectraError(Exception):
    """Base class for all errors raised by slspectra."""


class ParameterError(SLSpectraError, ValueError):
    """Unknown family, missing or out-of-range parameter, badly normalized boundary vector."""


class CoefficientError(SLSpectraError, ArithmeticError):
    def __init__(self, name: str, t: float, value: float):
        self.name, self.t, self.value = name, t, value
        super().__init__(f"Coefficient {name} is not admissible at t={t!r} (value {value!r}).")


class IntegrationError(SLSpectraError, ArithmeticError):
    def __init__(self, message: str, t: Optional[float] = None):
        self.t = t
        super().__init__(message if t is None else f"{message} (t={t!r})")


class DegenerateSpectrumError(SLSpectraError):
    """The discriminant vanishes, so the eigenvalues coincide."""


class PivotError(SLSpectraError):
    """The (1,2) entry is too small to build the eigenvector matrix."""


class EllipticityError(SLSpectraError):
    def __init__(self, k: int, discr: complex):
        self.k, self.discr = k, discr
        super().__init__(f"X_{k} is not elliptic (discr = {discr!r}).")


class NotInBandError(SLSpectraError):
    """The spectral parameter lies outside the region where the asymptotic formulas hold."""


class NoMinimalSolutionError(SLSpectraError):
    """Both eigenvalues have the same modulus, so no solution decays."""


class UnresolvedClusterError(SLSpectraError):
    def __init__(self, lower: float, upper: float):
        self.lower, self.upper = lower, upper
        super().__init__(f"Unresolved cluster of eigenvalues in ({lower!r}, {upper!r}].")


class ConfigError(SLSpectraError, ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")
