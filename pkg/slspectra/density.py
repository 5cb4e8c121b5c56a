""" Christoffel-Darboux kernels, spectral density, density of states and eigenvalue counting """

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from slspectra.core import BoundaryVector, Frame, ModulationKind, SLParams
from slspectra.errors import IntegrationError, NotInBandError, ParameterError, UnresolvedClusterError
from slspectra.families.utils.diagnostics import carleman_rho, piecewise_quad, rho_integrand
from slspectra.spectral_class import bands, discr, limit_phase, require_validity
from slspectra.transfer import (DEFAULT_TOL, RENORM_THRESHOLD, integrate_system, monodromy_pair, propagate,
                                sample_coefficients, segments, variational_rhs)

logger = logging.getLogger(__name__)

MAX_GRID_STEP = 0.05
REFINE_LEVELS = 10  # ambiguous cells are halved down to step / 2**10
ROOT_XTOL = 1e-10
DOS_SAMPLES = 9


@dataclass(frozen=True)
class KernelSample:
    L: float
    K: float
    rho: float

    @property
    def ratio(self) -> float: return self.K / self.rho


@dataclass
class GEstimate:
    g: float
    error: float
    samples: List[KernelSample]
    tail_size: int


@dataclass
class DensityReport:
    lam: float
    samples: List[KernelSample]
    g: float
    g_err: float
    dos_density: float
    mu_prime: float
    mu_prime_err: float
    frame: ModulationKind

    def __post_init__(self):
        if not math.isclose(self.mu_prime * self.g, self.dos_density, rel_tol=1e-12):
            raise IntegrationError(f"mu' g = {self.mu_prime * self.g!r} does not match the density of states "
                                   f"{self.dos_density!r}")

    @property
    def positive(self) -> bool: return self.g > 0 and self.dos_density > 0 and self.mu_prime > 0


@dataclass(frozen=True)
class CountRow:
    L: float
    count: int
    rho: float

    @property
    def normalized(self) -> float: return self.count / self.rho


@dataclass
class CountTable:
    window: Tuple[float, float]
    rows: List[CountRow]
    target: float
    method: str = "scan"

    @property
    def deviation(self) -> float:
        """Relative deviation of the last normalized count from the target."""
        return abs(self.rows[-1].normalized - self.target) / self.target if self.target else math.inf


@dataclass
class Example1Row:
    lam: float
    t: float
    eta: Tuple[float, float]
    det: float
    mu_prime: float
    rhs: Optional[float] = None  # closed form, free family only

    @property
    def lhs(self) -> float: return self.det * self.mu_prime


def _real_lambda(lam: complex) -> float:
    lam = complex(lam)
    if lam.imag != 0:
        raise ParameterError(f"Expected a real spectral parameter, got {lam!r}.")
    return lam.real


def kernel_profile(params: SLParams, eta: BoundaryVector, lam: float, L_points: Sequence[float],
                   tol: float = DEFAULT_TOL) -> np.ndarray:
    """K_L(lam, lam; eta) at each of the increasing L_points, from one pass of the (u, pu', K) system."""
    lam = _real_lambda(lam)
    points = np.asarray(L_points, dtype=float)
    if points.size == 0 or points[0] <= 0 or np.any(np.diff(points) <= 0):
        raise ParameterError("L_points must be positive and strictly increasing.")

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        pt, pot, wt = sample_coefficients(params, t, lam)
        return np.array([y[1] / pt, pot * y[0], wt * y[0] * y[0]])

    y = np.array([*eta.pd_vector(), 0.0])
    log_scale, out, start = 0.0, [], 0.0
    for L in points:
        for lo, hi in segments(params, start, float(L), max_len=params.omega):
            y = integrate_system(rhs, y, params, lo, hi, tol)
            norm = float(np.max(np.abs(y[:2])))
            if norm > RENORM_THRESHOLD:
                y = np.array([y[0] / norm, y[1] / norm, y[2] / norm ** 2])
                log_scale += 2 * math.log(norm)
        if log_scale > 700:
            raise IntegrationError("K_L overflows a double", float(L))
        out.append(y[2] * math.exp(log_scale))
        start = float(L)
    return np.array(out)


def cd_kernel_diag(params: SLParams, eta: BoundaryVector, lam: float, L: float, tol: float = DEFAULT_TOL) -> float:
    """K_L(lam, lam; eta): the integral of u(t, eta; lam)^2 w(t) over [0, L]."""
    if not L > 0:
        raise ParameterError(f"L must be positive, got {L!r}.")
    return float(kernel_profile(params, eta, lam, [L], tol)[0])


def rho_profile(params: SLParams, L_points: Sequence[float], tol: float = DEFAULT_TOL) -> np.ndarray:
    """rho_L at each increasing L, accumulated piece by piece."""
    f = rho_integrand(params)
    total, start, out = 0.0, 0.0, []
    for L in L_points:
        pieces = segments(params, start, float(L), max_len=params.omega)
        total += math.fsum(piecewise_quad(f, a, b, [], tol) for a, b in pieces)
        out.append(total)
        start = float(L)
    return np.array(out)


def period_schedule(params: SLParams, periods: Sequence[int], s: float = 0.0) -> List[float]:
    """L = s + n omega for each n."""
    if any(n <= 0 for n in periods):
        raise ParameterError("Period counts must be positive.")
    return [s + n * params.omega for n in periods]


def _tail_size(params: SLParams, lam: float, schedule: np.ndarray, tol: float) -> int:
    k = max(1, math.ceil(len(schedule) / 4))
    theta = limit_phase(params, lam, tol)
    if theta and len(schedule) > 1:
        spacing = float(np.median(np.diff(schedule))) / params.omega
        if spacing > 0:
            k = max(k, math.ceil(math.pi / (theta * spacing)))
    return min(k, len(schedule))


def g_estimate(params: SLParams, eta: BoundaryVector, lam: float, L_schedule: Sequence[float],
               tol: float = DEFAULT_TOL) -> GEstimate:
    """Cesaro-smoothed tail of K_L / rho_L over the schedule.

    The tail is the last quarter of the schedule, widened to one revolution of the limit Bloch
    phase when that is known. The error estimate is half the tail's spread.

    Raises:
        NotInBandError: Case != I (modulated) or lam outside the bands (otherwise).
    """
    lam = _real_lambda(lam)
    require_validity(params, lam, tol)
    schedule = np.asarray(L_schedule, dtype=float)
    K = kernel_profile(params, eta, lam, schedule, tol)
    rho = rho_profile(params, schedule, tol)
    samples = [KernelSample(float(L), float(k), float(r)) for L, k, r in zip(schedule, K, rho)]
    size = _tail_size(params, lam, schedule, tol)
    tail = np.array([s.ratio for s in samples[-size:]])
    return GEstimate(g=float(np.mean(tail)), error=0.5 * float(np.max(tail) - np.min(tail)),
                     samples=samples, tail_size=size)


def _gamma(params: SLParams, tol: float) -> float:
    limit = params.limit()
    if params.modulation_kind is ModulationKind.PERIODICALLY_MODULATED:
        f = lambda t: limit.w(t) / limit.p(t)
    else:
        f = limit.w
    return piecewise_quad(f, 0.0, params.omega, limit.breakpoints_between(0.0, params.omega), tol)


def _dos_value(params: SLParams, lam: float, tol: float) -> float:
    """(1/pi) |d_z tr T| / (gamma sqrt(-discr T)); 0 where discr T >= 0."""
    z = 0.0 if params.modulation_kind is ModulationKind.PERIODICALLY_MODULATED else lam
    T, dT = monodromy_pair(params, z, Frame.PDPRIME, tol)
    d = discr(T).real
    if d >= 0:
        return 0.0
    return abs(float(np.real(dT.trace))) / (math.pi * _gamma(params, tol) * math.sqrt(-d))


def dos_density(params: SLParams, lam: float = 0.0, tol: float = DEFAULT_TOL) -> float:
    """Density of states: lambda-independent for modulated parameters, a band function otherwise."""
    lam = _real_lambda(lam)
    require_validity(params, lam, tol)
    value = _dos_value(params, lam, tol)
    if value <= 0:
        raise NotInBandError(f"density of states vanishes at lambda = {lam!r}.")
    return value


def spectral_density(params: SLParams, eta: BoundaryVector, lam: float, L_schedule: Sequence[float],
                     tol: float = DEFAULT_TOL) -> DensityReport:
    """mu'(lam) = dos / g with the kernel samples it was computed from."""
    est = g_estimate(params, eta, lam, L_schedule, tol)
    dos = dos_density(params, lam, tol)
    mu = dos / est.g
    return DensityReport(lam=_real_lambda(lam), samples=est.samples, g=est.g, g_err=est.error, dos_density=dos,
                         mu_prime=mu, mu_prime_err=mu * est.error / est.g, frame=params.modulation_kind)


def _endpoint(params: SLParams, eta: BoundaryVector, L: float, lam: float, tol: float) -> float:
    """u(L, eta; lam) divided by the norm of the data at L (the sign of u with a scale-free size)."""
    trace = propagate(params, eta, [0.0, L], lam, Frame.PDPRIME, tol)
    end = trace.values[-1]
    return float(end[0] / np.max(np.abs(end)))


def _default_step(params: SLParams, L: float, window: Tuple[float, float], tol: float) -> float:
    a, b = window
    dens = []
    for i in range(DOS_SAMPLES):
        lam = a + (b - a) * (i + 0.5) / DOS_SAMPLES
        if params.modulation_kind is ModulationKind.PERIODICALLY_MODULATED and dens:
            break
        dens.append(_dos_value(params, lam, tol))
    peak = max(dens) if dens else 0.0
    if peak <= 0:
        return MAX_GRID_STEP
    return min(MAX_GRID_STEP, 0.5 / (peak * carleman_rho(params, L, tol)))


def eigenvalues(params: SLParams, eta: BoundaryVector, L: float, window: Tuple[float, float],
                step: Optional[float] = None, tol: float = DEFAULT_TOL) -> List[float]:
    """Zeros of lam -> u(L, eta; lam) in (a, b], by sign-change scanning and bisection.

    Raises:
        UnresolvedClusterError: a cell stays sign-ambiguous after refining to step / 1024.
    """
    a, b = window
    if not a < b:
        raise ParameterError(f"Window must satisfy a < b, got {window!r}.")
    if not L > 0:
        raise ParameterError(f"L must be positive, got {L!r}.")
    step = step if step is not None else _default_step(params, L, window, tol)
    if not step > 0:
        raise ParameterError(f"Grid step must be positive, got {step!r}.")
    noise = max(1e3 * tol, 1e-12)
    f = lambda lam: _endpoint(params, eta, L, lam, tol)

    grid = np.linspace(a, b, max(2, math.ceil((b - a) / step - 1e-9) + 1))
    samples = [(float(x), f(float(x))) for x in grid]
    resolved: List[Tuple[float, float]] = [samples[0]]
    for (lo, f_lo), (hi, f_hi) in zip(samples, samples[1:]):
        resolved.extend(_refine(f, lo, f_lo, hi, f_hi, noise, step / 2 ** REFINE_LEVELS))
    roots = []
    for (lo, f_lo), (hi, f_hi) in zip(resolved, resolved[1:]):
        if f_lo == 0.0 and lo > a:
            roots.append(lo)
        elif f_lo * f_hi < 0:
            roots.append(brentq(f, lo, hi, xtol=ROOT_XTOL))
    if resolved[-1][1] == 0.0:
        roots.append(resolved[-1][0])
    return sorted(r for r in roots if a < r <= b)


def _refine(f, lo: float, f_lo: float, hi: float, f_hi: float, noise: float, min_width: float) -> List[Tuple[float, float]]:
    """Samples on (lo, hi]; a cell whose two ends are both below the noise floor is bisected."""
    if abs(f_lo) >= noise or abs(f_hi) >= noise:
        return [(hi, f_hi)]
    if hi - lo < min_width:
        raise UnresolvedClusterError(lo, hi)
    mid = 0.5 * (lo + hi)
    f_mid = f(mid)
    return _refine(f, lo, f_lo, mid, f_mid, noise, min_width) + _refine(f, mid, f_mid, hi, f_hi, noise, min_width)


def prufer_angle(params: SLParams, eta: BoundaryVector, L: float, lam: float, tol: float = DEFAULT_TOL) -> float:
    """theta(L) for theta' = cos^2/p + (lam w - q) sin^2 and u = r sin theta, pu' = r cos theta."""
    lam = _real_lambda(lam)
    u0, v0 = eta.pd_vector()
    theta0 = math.atan2(u0, v0) % math.pi

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        pt, pot, _ = sample_coefficients(params, t, lam)
        s, c = math.sin(y[0]), math.cos(y[0])
        return np.array([c * c / pt - pot * s * s])

    return float(integrate_system(rhs, np.array([theta0]), params, 0.0, L, tol)[0])


def prufer_count(params: SLParams, eta: BoundaryVector, L: float, lam: float, tol: float = DEFAULT_TOL) -> int:
    """Number of Dirichlet-at-L eigenvalues <= lam."""
    if not L > 0:
        raise ParameterError(f"L must be positive, got {L!r}.")
    return math.floor(prufer_angle(params, eta, L, lam, tol) / math.pi)


def count_eigenvalues(params: SLParams, eta: BoundaryVector, L: float, window: Tuple[float, float],
                      step: Optional[float] = None, tol: float = DEFAULT_TOL, method: str = "scan") -> int:
    """Eigenvalues of the problem truncated at L (u(L) = 0) in the window (a, b].

    Args:
        method: "scan" (sign changes of u(L; lam)) or "prufer" (N(b) - N(a) from the Prufer angle).
    """
    a, b = window
    if method == "prufer":
        if not a < b:
            raise ParameterError(f"Window must satisfy a < b, got {window!r}.")
        return prufer_count(params, eta, L, b, tol) - prufer_count(params, eta, L, a, tol)
    if method != "scan":
        raise ParameterError(f"Unknown counting method {method!r}; expected 'scan' or 'prufer'.")
    return len(eigenvalues(params, eta, L, window, step, tol))


def dos_target(params: SLParams, window: Tuple[float, float], tol: float = DEFAULT_TOL) -> float:
    """nu_inf(window): the integral of the density of states over (a, b]."""
    a, b = window
    if params.modulation_kind is ModulationKind.PERIODICALLY_MODULATED:
        return dos_density(params, 0.0, tol) * (b - a)
    total = 0.0
    for lo, hi in bands(params, a, b, scan_step=(b - a) / 200, tol=tol):
        total += piecewise_quad(lambda lam: _dos_value(params, lam, tol), lo, hi, [], 1e-8)
    return total


def dos_convergence(params: SLParams, eta: BoundaryVector, window: Tuple[float, float], L_schedule: Sequence[float],
                    tol: float = DEFAULT_TOL, count_method: str = "scan", step: Optional[float] = None) -> CountTable:
    """Normalized eigenvalue counts along the schedule against their limit nu_inf(window)."""
    a, b = window
    if not a < b:
        raise ParameterError(f"Window must satisfy a < b, got {window!r}.")
    for lam in (a + (b - a) * k / 4 for k in (1, 2, 3)):
        require_validity(params, lam, tol)
    rows = []
    for L in L_schedule:
        count = count_eigenvalues(params, eta, float(L), window, step, tol, count_method)
        rows.append(CountRow(float(L), count, carleman_rho(params, float(L), tol)))
        logger.info("L = %g: %d eigenvalues in (%g, %g], normalized %.6g", L, count, a, b, rows[-1].normalized)
    return CountTable(window=(a, b), rows=rows, target=dos_target(params, window, tol), method=count_method)


def cauchy_transform(params: SLParams, eta: BoundaryVector, L: float, z: complex, tol: float = DEFAULT_TOL) -> complex:
    """-d_z u(L, eta; z) / u(L, eta; z) from the variational system, for Im z != 0."""
    z = complex(z)
    if z.imag == 0:
        raise ParameterError("The Cauchy transform needs Im z != 0.")
    if not L > 0:
        raise ParameterError(f"L must be positive, got {L!r}.")
    rhs = variational_rhs(params, z)
    y = np.array([*eta.pd_vector(), 0.0, 0.0], dtype=complex)
    for lo, hi in segments(params, 0.0, L, max_len=params.omega):
        y = integrate_system(rhs, y, params, lo, hi, tol)
        norm = float(np.max(np.abs(y[:2])))
        if norm > RENORM_THRESHOLD:
            y = y / norm
    if y[0] == 0:
        raise IntegrationError("u(L; z) vanished", L)
    return complex(-y[2] / y[0])


def cauchy_limit(params: SLParams, tol: float = DEFAULT_TOL) -> complex:
    """i pi dos: the limit of the Cauchy transform divided by rho_L for modulated parameters."""
    return 1j * math.pi * dos_density(params, 0.0, tol)


def example1_identity(params: SLParams, eta: BoundaryVector, lam: float, t: float, L_schedule: Sequence[float],
                      tol: float = DEFAULT_TOL, mu_prime: Optional[float] = None) -> Example1Row:
    """det [[u(t+w), u(t)], [u'(t+w), u'(t)]] times mu'(lam); the free family also gets sin(sqrt(lam) w)/pi."""
    lam = _real_lambda(lam)
    if not 0 <= t <= params.omega:
        raise ParameterError(f"t must lie in [0, omega], got {t!r}.")
    grid = [0.0, params.omega] if t == 0 else [0.0, t, t + params.omega]
    data = propagate(params, eta, grid, lam, Frame.DPRIME, tol).unscaled()
    (u_t, d_t), (u_tw, d_tw) = data[-2], data[-1]
    if mu_prime is None:
        mu_prime = spectral_density(params, eta, lam, L_schedule, tol).mu_prime
    rhs = math.sin(math.sqrt(lam) * params.omega) / math.pi if params.name == "free" and lam > 0 else None
    return Example1Row(lam=lam, t=t, eta=eta.as_tuple(), det=float(u_tw * d_t - u_t * d_tw),
                       mu_prime=mu_prime, rhs=rhs)
