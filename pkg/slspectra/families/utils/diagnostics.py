""" Scalar diagnostics of a parameter family: Carleman integral, Stolz defect, Liouville potential """

import logging
import math
import warnings
from typing import Callable, Dict, List

import numpy as np
from scipy import integrate

from slspectra.core import ModulationKind, SLParams
from slspectra.errors import CoefficientError, IntegrationError, ParameterError

logger = logging.getLogger(__name__)

QUAD_LIMIT = 200
STOLZ_SELECTORS = ("q/p", "w/p", "p'/p", "q", "w", "1/p")


def _finite(name: str, f: Callable[[float], float]) -> Callable[[float], float]:
    def checked(t: float) -> float:
        value = f(t)
        if not math.isfinite(value):
            raise CoefficientError(name, t, value)
        return value
    return checked


def piecewise_quad(f: Callable[[float], float], a: float, b: float, points: List[float], tol: float) -> float:
    """Adaptive Gauss-Kronrod quadrature of f over [a, b], split at the given points."""
    edges = [a, *[x for x in sorted(points) if a < x < b], b]
    parts = []
    for lo, hi in zip(edges, edges[1:]):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", integrate.IntegrationWarning)
            value, abserr = integrate.quad(f, lo, hi, epsabs=1e-14, epsrel=tol, limit=QUAD_LIMIT)
        if caught:
            logger.debug("quad on [%g, %g] reported: %s (abserr %.3g)", lo, hi, caught[-1].message, abserr)
        if not math.isfinite(value):
            raise IntegrationError(f"Quadrature produced a non-finite value on [{lo}, {hi}].", lo)
        parts.append(value)
    return math.fsum(parts)


def rho_integrand(params: SLParams) -> Callable[[float], float]:
    """w/p for modulated families, w otherwise."""
    if params.modulation_kind is ModulationKind.PERIODICALLY_MODULATED:
        return _finite("w/p", lambda t: params.w(t) / params.check_positive(t))
    return _finite("w", params.w)


def carleman_rho(params: SLParams, L: float, tol: float = 1e-10) -> float:
    """rho_L: the integral of w/p (modulated) or w (otherwise) over [0, L]."""
    if not L > 0:
        raise ParameterError(f"L must be positive, got {L!r}.")
    # per-period pieces keep quad's subdivision limit local on long ranges
    points = params.breakpoints_between(0.0, L) + list(np.arange(1, math.ceil(L / params.omega)) * params.omega)
    return piecewise_quad(rho_integrand(params), 0.0, L, points, tol)


def _selector(params: SLParams, selector: str) -> Callable[[float], float]:
    p, q, w, pp = params.p, params.q, params.w, params.p_prime
    table: Dict[str, Callable[[float], float]] = {
        "q/p": lambda t: q(t) / p(t),
        "w/p": lambda t: w(t) / p(t),
        "p'/p": lambda t: pp(t) / p(t),
        "q": q,
        "w": w,
        "1/p": lambda t: 1.0 / p(t),
    }
    if selector not in table:
        raise ParameterError(f"Unknown Stolz selector {selector!r}; expected one of {STOLZ_SELECTORS}.")
    return _finite(selector, table[selector])


def stolz_defect(params: SLParams, selector: str, n_max: int, tol: float = 1e-10) -> np.ndarray:
    """Partial sums over n = 1..N of the integral over one period of |f(nw + s + w) - f(nw + s)|.

    A bounded, slowly growing sequence is evidence for the Stolz class; no verdict is drawn.
    """
    if n_max < 1:
        raise ParameterError(f"n_max must be at least 1, got {n_max!r}.")
    f, omega = _selector(params, selector), params.omega
    delta = lambda x: abs(f(x + omega) - f(x))
    increments = []
    for n in range(1, n_max + 1):
        lo, hi = n * omega, (n + 1) * omega
        kinks = params.breakpoints_between(lo, hi) + [b - omega for b in params.breakpoints_between(hi, hi + omega)]
        increments.append(piecewise_quad(delta, lo, hi, kinks, tol))
    return np.cumsum(increments)


def _example2(params: SLParams):
    from slspectra.families.Example2.family import Example2Family
    if params.name not in ("example2", "example4"):
        raise ParameterError(f"The Liouville potential is only defined for example2, not {params.name}.")
    fp = params.family_params
    return Example2Family(kappa=fp["kappa"], c=fp["c"], omega=fp["omega"])


def liouville_map(params: SLParams, t: float) -> float:
    """x(t): the integral of sqrt(w/p) over [0, t]."""
    return _example2(params).liouville_x(t)


def liouville_inverse(params: SLParams, x: float) -> float:
    return _example2(params).liouville_t(x)


def liouville_potential(params: SLParams, x: float) -> float:
    """V(x) = (1 + t(x))^(2 kappa) q_limit(t(x)) of the unitarily equivalent Schrodinger operator."""
    if x < 0:
        raise ParameterError(f"x must be non-negative, got {x!r}.")
    return _example2(params).potential(x)
