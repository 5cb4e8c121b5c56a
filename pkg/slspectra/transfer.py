""" Transfer matrices, monodromy matrices, shift matrices X_n and solution propagation """

import logging
import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from slspectra.core import BoundaryVector, Frame, Mat2, SLParams, SolutionTrace
from slspectra.errors import CoefficientError, IntegrationError, ParameterError

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_METHOD = "DOP853"
METHODS = ("RK45", "DOP853")
ATOL_FACTOR = 1e-3
RENORM_THRESHOLD = 1e50
RK4_STEP = 1e-4

Rhs = Callable[[float, np.ndarray], np.ndarray]


def _as_z(z: complex) -> Tuple[complex, bool]:
    z = complex(z)
    return z, z.imag == 0.0


def sample_coefficients(params: SLParams, t: float, z: complex) -> Tuple[float, complex, float]:
    """(p(t), q(t) - z w(t), w(t)) with admissibility checks."""
    pt = params.p(t)
    if not (pt > 0 and math.isfinite(pt)):
        raise CoefficientError("p", t, pt)
    wt, qt = params.w(t), params.q(t)
    if not (math.isfinite(wt) and math.isfinite(qt)):
        raise CoefficientError("q" if math.isfinite(wt) else "w", t, qt if math.isfinite(wt) else wt)
    return pt, qt - z * wt, wt


def pd_rhs(params: SLParams, z: complex) -> Rhs:
    """Right-hand side of (u, p u')' = b(t; z)(u, p u') for any number of stacked (u, pu') pairs."""
    z, real = _as_z(z)
    zz = z.real if real else z

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        pt, pot, _ = sample_coefficients(params, t, zz)
        out = np.empty_like(y)
        out[0::2] = y[1::2] / pt
        out[1::2] = pot * y[0::2]
        return out
    return rhs


def variational_rhs(params: SLParams, z: complex) -> Rhs:
    """Base pairs in the first half of y, their z-derivatives in the second half."""
    z, real = _as_z(z)
    zz = z.real if real else z

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        pt, pot, wt = sample_coefficients(params, t, zz)
        h = len(y) // 2
        out = np.empty_like(y)
        out[0:h:2] = y[1:h:2] / pt
        out[1:h:2] = pot * y[0:h:2]
        out[h::2] = y[h + 1::2] / pt
        out[h + 1::2] = pot * y[h::2] - wt * y[0:h:2]
        return out
    return rhs


def segments(params: SLParams, t0: float, t1: float, max_len: Optional[float] = None) -> List[Tuple[float, float]]:
    """Split [t0, t1] at coefficient breakpoints (and optionally every max_len)."""
    points = {t0, t1, *params.breakpoints_between(t0, t1)}
    if max_len is not None and t1 - t0 > max_len:
        points.update(t0 + k * max_len for k in range(1, math.ceil((t1 - t0) / max_len)))
    ordered = sorted(p for p in points if t0 <= p <= t1)
    return [(a, b) for a, b in zip(ordered, ordered[1:]) if b > a]


def integrate_system(rhs: Rhs, y0: np.ndarray, params: SLParams, t0: float, t1: float,
                     tol: float = DEFAULT_TOL, method: Optional[str] = None) -> np.ndarray:
    """Integrate y' = rhs(t, y) from t0 to t1, restarting at every breakpoint."""
    method = method or DEFAULT_METHOD
    if method not in METHODS:
        raise ParameterError(f"Unknown integration method {method!r}; expected one of {METHODS}.")
    if not tol > 0:
        raise ParameterError(f"tol must be positive, got {tol!r}.")
    y = np.asarray(y0)
    for a, b in segments(params, t0, t1):
        sol = solve_ivp(rhs, (a, b), y, method=method, rtol=tol, atol=tol * ATOL_FACTOR)
        if not sol.success:
            raise IntegrationError(f"Integration failed: {sol.message}", float(sol.t[-1]))
        y = sol.y[:, -1]
        if not np.all(np.isfinite(y)):
            raise IntegrationError("Solution overflowed", b)
    return y


def _columns_to_mat(y: np.ndarray) -> Mat2:
    return Mat2(np.array([[y[0], y[2]], [y[1], y[3]]]))


def _identity_state(real: bool) -> np.ndarray:
    return np.array([1.0, 0.0, 0.0, 1.0], dtype=float if real else complex)


def convert_matrix(M: Mat2, params: SLParams, t0: float, t1: float, frame: Frame) -> Mat2:
    """Express a PDPrime propagator from t0 to t1 in the requested frame."""
    if frame is Frame.PDPRIME:
        return M
    p0, p1 = params.check_positive(t0), params.check_positive(t1)
    e = M.entries
    return Mat2(np.array([[e[0, 0], e[0, 1] * p0], [e[1, 0] / p1, e[1, 1] * p0 / p1]]))


def convert_vector(v: np.ndarray, params: SLParams, t: float, src: Frame, dst: Frame) -> np.ndarray:
    """Left-multiplication by diag(1, p(t)) (DPrime -> PDPrime) or its inverse."""
    if src is dst:
        return np.asarray(v)
    pt = params.check_positive(t)
    v = np.asarray(v)
    return np.array([v[0], v[1] * pt]) if dst is Frame.PDPRIME else np.array([v[0], v[1] / pt])


def transfer_matrix(params: SLParams, t0: float, t1: float, z: complex, frame: Optional[Frame] = None,
                    tol: float = DEFAULT_TOL, method: Optional[str] = None) -> Mat2:
    """T(t1; z) T(t0; z)^{-1}: the propagator of solution data from t0 to t1.

    Args:
        params: the Sturm-Liouville parameters.
        t0, t1: 0 <= t0 <= t1.
        z: spectral parameter; real z keeps the integration in real arithmetic.
        frame: DPrime or PDPrime; defaults to the natural frame of params.

    Returns:
        Mat2: the transfer matrix in the requested frame.
    """
    if not 0 <= t0 <= t1:
        raise ParameterError(f"Need 0 <= t0 <= t1, got t0={t0!r}, t1={t1!r}.")
    frame = frame or params.natural_frame
    _, real = _as_z(z)
    y = integrate_system(pd_rhs(params, z), _identity_state(real), params, t0, t1, tol, method)
    return convert_matrix(_columns_to_mat(y), params, t0, t1, frame)


def monodromy(params: SLParams, z: complex, frame: Optional[Frame] = None, tol: float = DEFAULT_TOL,
              method: Optional[str] = None) -> Mat2:
    """Transfer matrix of the periodic limit over one period [0, omega]."""
    return transfer_matrix(params.limit(), 0.0, params.omega, z, frame or params.natural_frame, tol, method)


def monodromy_pair(params: SLParams, z: complex, frame: Optional[Frame] = None, tol: float = DEFAULT_TOL,
                   method: Optional[str] = None) -> Tuple[Mat2, Mat2]:
    """Monodromy matrix and its z-derivative from one pass of the 8-dimensional variational system."""
    limit, frame = params.limit(), frame or params.natural_frame
    _, real = _as_z(z)
    y0 = np.concatenate([_identity_state(real), np.zeros(4, dtype=float if real else complex)])
    y = integrate_system(variational_rhs(limit, z), y0, limit, 0.0, params.omega, tol, method)
    T, dT = _columns_to_mat(y[:4]), _columns_to_mat(y[4:])
    return (convert_matrix(T, limit, 0.0, params.omega, frame), convert_matrix(dT, limit, 0.0, params.omega, frame))


def monodromy_dz(params: SLParams, z: complex, frame: Optional[Frame] = None, tol: float = DEFAULT_TOL,
                 method: Optional[str] = None) -> Mat2:
    """d/dz of the monodromy matrix, computed by variation of parameters (no finite differences)."""
    return monodromy_pair(params, z, frame, tol, method)[1]


def shift_matrix_Xn(params: SLParams, n: int, t: float, z: complex, frame: Optional[Frame] = None,
                    tol: float = DEFAULT_TOL, method: Optional[str] = None) -> Mat2:
    """X_n(t; z) = T(t + (n+1) omega) T(t + n omega)^{-1}, integrated directly over that period."""
    if n < 0:
        raise ParameterError(f"n must be non-negative, got {n!r}.")
    if not 0 <= t <= params.omega:
        raise ParameterError(f"t must lie in [0, omega], got {t!r}.")
    start = t + n * params.omega
    return transfer_matrix(params, start, start + params.omega, z, frame, tol, method)


def shift_matrices(params: SLParams, n_max: int, t: float, z: complex, frame: Optional[Frame] = None,
                   tol: float = DEFAULT_TOL, method: Optional[str] = None) -> List[Mat2]:
    """[X_0, ..., X_{n_max - 1}] at offset t."""
    return [shift_matrix_Xn(params, n, t, z, frame, tol, method) for n in range(n_max)]


def propagate_vector(params: SLParams, y0: np.ndarray, t_grid: Sequence[float], z: complex,
                     frame: Optional[Frame] = None, tol: float = DEFAULT_TOL, method: Optional[str] = None,
                     renormalize: bool = True, eta: Optional[BoundaryVector] = None) -> SolutionTrace:
    """Continue the solution with PDPrime data y0 = (u(0), p u'(0)) along t_grid (which must start at 0).

    Values are stored as values * exp(log_scales); with renormalize the stored vector is rescaled
    whenever its norm leaves [1/RENORM_THRESHOLD, RENORM_THRESHOLD].
    """
    grid = np.asarray(t_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or grid[0] != 0.0:
        raise ParameterError("t_grid must be a non-empty 1-d grid starting at 0.")
    if np.any(np.diff(grid) <= 0):
        raise ParameterError("t_grid must be strictly increasing.")
    frame = frame or params.natural_frame
    z, real = _as_z(z)
    y = np.asarray(y0)
    real = real and not np.iscomplexobj(y)
    rhs = pd_rhs(params, z)
    y = y.astype(float if real else complex)
    log_scale = 0.0
    values, scales = [convert_vector(y, params, 0.0, Frame.PDPRIME, frame)], [0.0]
    for a, b in zip(grid, grid[1:]):
        for lo, hi in segments(params, a, b, max_len=params.omega):
            y = integrate_system(rhs, y, params, lo, hi, tol, method)
            norm = float(np.max(np.abs(y)))
            if renormalize and norm > 0 and not 1.0 / RENORM_THRESHOLD <= norm <= RENORM_THRESHOLD:
                y, log_scale = y / norm, log_scale + math.log(norm)
                logger.debug("renormalized solution at t=%g (log scale %.6g)", hi, log_scale)
            elif not renormalize and norm > RENORM_THRESHOLD ** 6:
                raise IntegrationError("Solution overflow without renormalization", hi)
        values.append(convert_vector(y, params, b, Frame.PDPRIME, frame))
        scales.append(log_scale)
    return SolutionTrace(grid=grid, values=np.array(values), log_scales=np.array(scales), z=z, eta=eta, frame=frame)


def propagate(params: SLParams, eta: BoundaryVector, t_grid: Sequence[float], z: complex,
              frame: Optional[Frame] = None, tol: float = DEFAULT_TOL, method: Optional[str] = None,
              renormalize: bool = True) -> SolutionTrace:
    """The solution with boundary data eta at 0, sampled on t_grid."""
    return propagate_vector(params, eta.pd_vector(), t_grid, z, frame, tol, method, renormalize, eta=eta)


def rk4_transfer_matrix(params: SLParams, t0: float, t1: float, z: complex, frame: Optional[Frame] = None,
                        h: float = RK4_STEP) -> Mat2:
    """Fixed-step classical RK4 propagator; the brute-force oracle for transfer_matrix."""
    if not 0 <= t0 <= t1:
        raise ParameterError(f"Need 0 <= t0 <= t1, got t0={t0!r}, t1={t1!r}.")
    frame = frame or params.natural_frame
    z, real = _as_z(z)
    f = pd_rhs(params, z)
    y = _identity_state(real)
    for a, b in segments(params, t0, t1):
        steps = max(1, math.ceil((b - a) / h))
        dt = (b - a) / steps
        for k in range(steps):
            t = a + k * dt
            k1 = f(t, y)
            k2 = f(t + dt / 2, y + dt / 2 * k1)
            k3 = f(t + dt / 2, y + dt / 2 * k2)
            k4 = f(t + dt, y + dt * k3)
            y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return convert_matrix(_columns_to_mat(y), params, t0, t1, frame)
