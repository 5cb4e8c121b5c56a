import math

from slspectra.errors import ParameterError

TWO_PI = 2.0 * math.pi


def require_finite(name: str, value: float) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ParameterError(f"Parameter {name} must be a real number, got {value!r}.")
    if not math.isfinite(value):
        raise ParameterError(f"Parameter {name} must be finite, got {value!r}.")
    return value


def require_positive_period(omega: float) -> float:
    omega = require_finite("omega", omega)
    if omega <= 0:
        raise ParameterError(f"Period omega must be positive, got {omega!r}.")
    return omega


def require_period_multiple(omega: float, base: float = TWO_PI) -> float:
    """The periodic limit contains sin t, so omega must be a positive multiple of 2*pi."""
    omega = require_positive_period(omega)
    ratio = omega / base
    if ratio < 1 - 1e-9 or abs(ratio - round(ratio)) > 1e-9:
        raise ParameterError(f"Period omega={omega!r} is not a positive multiple of {base!r}.")
    return omega
