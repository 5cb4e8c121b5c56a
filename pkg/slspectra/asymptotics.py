""" n-indexed asymptotics: solution sequences, Turan determinants, phases, the envelope phi and minimal solutions """

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from slspectra.core import BoundaryVector, Frame, Mat2, ModulationKind, SLParams, SolutionTrace
from slspectra.errors import DegenerateSpectrumError, EllipticityError, NoMinimalSolutionError, ParameterError
from slspectra.spectral_class import DELTA, discr, eigen_pm, require_validity
from slspectra.transfer import (DEFAULT_TOL, convert_vector, monodromy, propagate, propagate_vector,
                                shift_matrices, transfer_matrix)

logger = logging.getLogger(__name__)

PHI_FLOOR = 1e-8
MIN_BUFFER = 20
EDGE_WINDOW = 10


@dataclass
class SolutionSeq:
    """u_n = u(t + n omega), stored as (u, deriv) * exp(log_scale) per n."""
    t: float
    eta: BoundaryVector
    z: complex
    frame: Frame
    u: np.ndarray
    deriv: np.ndarray
    log_scale: np.ndarray

    def __len__(self) -> int: return len(self.u)

    @property
    def entries(self) -> List[Tuple[complex, complex, float]]:
        return list(zip(self.u.tolist(), self.deriv.tolist(), self.log_scale.tolist()))

    def unscaled(self) -> np.ndarray:
        return np.stack([self.u, self.deriv], axis=1) * np.exp(self.log_scale)[:, None]

    def log_norms(self) -> np.ndarray:
        """log of the max-norm of each unscaled vector; finite even when the values overflow."""
        scaled = np.maximum(np.abs(self.u), np.abs(self.deriv))
        with np.errstate(divide="ignore"):
            return np.log(scaled) + self.log_scale


@dataclass
class TuranSeq:
    """v_n = p_n(t) |u_{n+1} u'_n - u_n u'_{n+1}| (DPrime) or |u_{n+1} (pu')_n - u_n (pu')_{n+1}| (PDPrime)."""
    values: np.ndarray
    t: float
    eta: BoundaryVector
    z: complex
    frame: Frame

    @property
    def tail(self) -> float: return float(self.values[-1])

    @property
    def last_increment(self) -> float: return float(abs(self.values[-1] - self.values[-2])) if len(self.values) > 1 else 0.0

    def cauchy_increments(self) -> np.ndarray:
        """sup_{m >= n} |v_m - v_n| for every n."""
        v = self.values
        return np.array([np.max(np.abs(v[n:] - v[n])) for n in range(len(v))])


@dataclass
class PhiReport:
    phi: complex
    M: int
    delta: float
    n_max: int
    phi_seq: np.ndarray  # phi_n for n = M..n_max
    thetas: np.ndarray  # theta_k for k = M..n_max
    limit_discr: float
    amplitude: float  # 2 |phi| / sqrt(-discr) of the limit
    residuals: np.ndarray  # E_n for n = M..n_max
    residual: float  # max |E_n| over the last EDGE_WINDOW values
    residual_head: float  # max |E_n| over the first EDGE_WINDOW values
    max_phase_step: float
    possibly_vanishing: bool

    @property
    def relative_residual(self) -> float: return self.residual / self.amplitude if self.amplitude > 0 else math.inf


@dataclass
class MinimalSolution:
    trace: SolutionTrace
    decay_rate: float  # exp of the mean log|lambda_-| over the last quarter of the retained range
    empirical_rate: float  # per-period ratio of the backward-recursed norms over the same range
    initial: np.ndarray  # data at t in the trace's frame, unit max-norm
    n_max: int
    buffer: int


def _seq_grid(params: SLParams, t: float, n_max: int) -> Tuple[np.ndarray, int]:
    points = t + params.omega * np.arange(n_max + 1)
    if t == 0:
        return points, 0
    return np.concatenate([[0.0], points]), 1


def _check_offset(params: SLParams, t: float):
    if not 0 <= t <= params.omega:
        raise ParameterError(f"t must lie in [0, omega], got {t!r}.")


def solution_seq(params: SLParams, eta: BoundaryVector, t: float, z: complex, n_max: int,
                 tol: float = DEFAULT_TOL, frame: Optional[Frame] = None) -> SolutionSeq:
    """u_n(t, eta; z) for n = 0..n_max in the natural (or given) frame."""
    if n_max < 1:
        raise ParameterError(f"n_max must be at least 1, got {n_max!r}.")
    _check_offset(params, t)
    grid, skip = _seq_grid(params, t, n_max)
    trace = propagate(params, eta, grid, z, frame, tol)
    return SolutionSeq(t=t, eta=eta, z=trace.z, frame=trace.frame, u=trace.values[skip:, 0],
                       deriv=trace.values[skip:, 1], log_scale=trace.log_scales[skip:])


def turan_seq(params: SLParams, eta: BoundaryVector, t: float, z: complex, n_max: int,
              tol: float = DEFAULT_TOL, frame: Optional[Frame] = None, check_case: bool = True) -> TuranSeq:
    """Turan determinants v_0..v_{n_max}.

    Args:
        check_case: require Case I (modulated) or z in the bands (otherwise); pass False for experiments.
    """
    if check_case:
        require_validity(params, z, tol)
    seq = solution_seq(params, eta, t, z, n_max + 1, tol, frame)
    u, d, ls = seq.u, seq.deriv, seq.log_scale
    cross = np.abs(u[1:] * d[:-1] - u[:-1] * d[1:])
    if seq.frame is Frame.DPRIME:
        cross = cross * np.array([params.check_positive(t + n * params.omega) for n in range(n_max + 1)])
    with np.errstate(over="ignore"):
        values = cross * np.exp(ls[:-1] + ls[1:])
    return TuranSeq(values=values, t=t, eta=eta, z=seq.z, frame=seq.frame)


def _n_range(n_range: Union[Tuple[int, int], Iterable[int]]) -> List[int]:
    if isinstance(n_range, tuple) and len(n_range) == 2:
        return list(range(*n_range))
    return list(n_range)


def _theta(X: Mat2, k: int, tol: float) -> float:
    d = discr(X).real
    if d >= -100 * tol:
        raise EllipticityError(k, d)
    v = float(np.real(X.trace)) / (2 * math.sqrt(float(np.real(X.det))))
    return math.acos(min(1.0, max(-1.0, v)))


def theta_phases(params: SLParams, t: float, z: float, n_range: Union[Tuple[int, int], Iterable[int]],
                 tol: float = DEFAULT_TOL, frame: Optional[Frame] = None) -> np.ndarray:
    """theta_k = arccos(tr X_k / (2 sqrt(det X_k))) for k in n_range; every X_k must be elliptic."""
    if complex(z).imag != 0:
        raise ParameterError("theta_phases needs a real spectral parameter.")
    _check_offset(params, t)
    ks = _n_range(n_range)
    if not ks or min(ks) < 0:
        raise ParameterError(f"n_range must be a non-empty range of non-negative indices, got {n_range!r}.")
    out = []
    for k in ks:
        start = t + k * params.omega
        X = transfer_matrix(params, start, start + params.omega, complex(z).real, frame, tol)
        out.append(_theta(X, k, tol))
    return np.array(out)


def adaptive_M(matrices: Sequence[Mat2], delta: float = DELTA) -> int:
    """Smallest M such that every X_k with k >= M has discr < -delta and |X12| > delta."""
    M = len(matrices)
    for k in range(len(matrices) - 1, -1, -1):
        X = matrices[k]
        if discr(X).real < -delta and abs(X.a12) > delta:
            M = k
        else:
            break
    if M == len(matrices):
        raise EllipticityError(len(matrices) - 1, discr(matrices[-1]))
    logger.info("adaptive start index M = %d (delta = %g)", M, delta)
    return M


def _forward(matrices: Sequence[Mat2], v0: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Scaled products X_{n-1}...X_0 v0 and their log scales."""
    vs, ls = [np.asarray(v0)], [0.0]
    for X in matrices:
        w = X @ vs[-1]
        s = float(np.max(np.abs(w)))
        vs.append(w / s)
        ls.append(ls[-1] + math.log(s))
    return np.array(vs), np.array(ls)


def _initial_vector(params: SLParams, eta: BoundaryVector, t: float, z: complex, frame: Frame, tol: float) -> np.ndarray:
    y0 = convert_vector(eta.pd_vector(), params, 0.0, Frame.PDPRIME, frame)
    if t == 0:
        return y0
    return transfer_matrix(params, 0.0, t, z, frame, tol) @ y0


def _limit_discr(params: SLParams, z: float, frame: Frame, tol: float) -> float:
    at = 0.0 if params.modulation_kind is ModulationKind.PERIODICALLY_MODULATED else z
    return discr(monodromy(params, at, frame, tol)).real


def phi_estimate(params: SLParams, eta: BoundaryVector, t: float, z: float, n_max: int,
                 tol: float = DEFAULT_TOL, floor: float = PHI_FLOOR, delta: float = DELTA,
                 frame: Optional[Frame] = None) -> PhiReport:
    """phi_n = (u_{n+1} - lambda_n^- u_n) / prod_{k=M}^{n-1} lambda_k^+ at n = n_max.

    Also fits the envelope u_n / prod |lambda_k^+| = (2|phi| / sqrt(-discr)) sin(sum theta_k + arg phi) + E_n
    and reports the residuals E_n.
    """
    if complex(z).imag != 0:
        raise ParameterError("phi_estimate needs a real spectral parameter.")
    if n_max < 1:
        raise ParameterError(f"n_max must be at least 1, got {n_max!r}.")
    _check_offset(params, t)
    z = complex(z).real
    require_validity(params, z, tol)
    frame = frame or params.natural_frame
    mats = shift_matrices(params, n_max + 1, t, z, frame, tol)
    M = adaptive_M(mats, delta)
    vs, ls = _forward(mats, _initial_vector(params, eta, t, z, frame, tol))

    phi_seq, log_prod, log_prods = [], 0.0 + 0.0j, []
    for n in range(M, n_max + 1):
        lp, lm = eigen_pm(mats[n])
        log_prods.append(log_prod)
        a = vs[n + 1][0] * math.exp(ls[n + 1] - ls[n]) - lm * vs[n][0]
        phi_seq.append(a * cmath.exp(ls[n] - log_prod))
        log_prod += cmath.log(lp)
    phi_seq = np.array(phi_seq)
    log_prods = np.array(log_prods)
    thetas = np.array([_theta(mats[k], k, tol) for k in range(M, n_max + 1)])
    phi = complex(phi_seq[-1])

    steps = np.abs(np.diff(np.unwrap(np.angle(phi_seq)))) if len(phi_seq) > 1 else np.zeros(1)
    max_step = float(np.max(steps)) if steps.size else 0.0
    if max_step >= math.pi / 2:
        logger.warning("arg phi_n jumps by %.3g rad between consecutive n", max_step)

    limit_discr = _limit_discr(params, z, frame, tol)
    if limit_discr >= 0:
        raise EllipticityError(n_max, limit_discr)
    amplitude = 2 * abs(phi) / math.sqrt(-limit_discr)
    scaled = np.real(vs[M:n_max + 1, 0]) * np.exp(ls[M:n_max + 1] - log_prods.real)
    residuals = scaled - amplitude * np.sin(log_prods.imag + cmath.phase(phi))

    vanishing = abs(phi) < floor
    if vanishing:
        logger.warning("|phi| = %.3g is below the floor %.3g: possibly vanishing", abs(phi), floor)
    return PhiReport(phi=phi, M=M, delta=delta, n_max=n_max, phi_seq=phi_seq, thetas=thetas,
                     limit_discr=limit_discr, amplitude=amplitude, residuals=residuals,
                     residual=float(np.max(np.abs(residuals[-EDGE_WINDOW:]))),
                     residual_head=float(np.max(np.abs(residuals[:EDGE_WINDOW]))),
                     max_phase_step=max_step, possibly_vanishing=vanishing)


def _minus_eigenvector(X: Mat2, lm: complex) -> np.ndarray:
    a = np.array([X.a12, lm - X.a11], dtype=complex)
    b = np.array([lm - X.a22, X.a21], dtype=complex)
    v = a if np.max(np.abs(a)) >= np.max(np.abs(b)) else b
    return v / np.max(np.abs(v))


def minimal_solution(params: SLParams, z: complex, n_max: int, tol: float = DEFAULT_TOL, t: float = 0.0,
                     frame: Optional[Frame] = None, buffer: int = MIN_BUFFER) -> MinimalSolution:
    """The solution decaying along t + n omega, by backward recursion from the lambda_- eigenvector.

    The recursion is seeded buffer periods beyond n_max; that stretch is discarded.

    Raises:
        NoMinimalSolutionError: if |lambda_+| = |lambda_-| (elliptic shift matrices at real z).
    """
    if n_max < 4:
        raise ParameterError(f"n_max must be at least 4, got {n_max!r}.")
    _check_offset(params, t)
    z = complex(z)
    frame = frame or params.natural_frame
    N = n_max + buffer
    mats = shift_matrices(params, N, t, z, frame, tol)
    last = mats[-1]
    if z.imag == 0 and discr(last).real < 0:
        raise NoMinimalSolutionError("no minimal solution at real z in Case I")
    try:
        lp, lm = eigen_pm(last)
    except DegenerateSpectrumError as e:
        raise NoMinimalSolutionError(f"no minimal solution: {e}")
    if math.isclose(abs(lp), abs(lm), rel_tol=1e-12):
        raise NoMinimalSolutionError("|lambda_+| = |lambda_-|: no minimal solution")

    v = _minus_eigenvector(last, lm)
    vs, ls = [v], [0.0]
    for X in reversed(mats):
        w = X.inv() @ vs[-1]
        s = float(np.max(np.abs(w)))
        vs.append(w / s)
        ls.append(ls[-1] + math.log(s))
    vs, ls = np.array(vs[::-1])[:n_max + 1], np.array(ls[::-1])[:n_max + 1]
    ls = ls - ls[0]

    quarter = range(3 * n_max // 4, n_max)
    decay = math.exp(float(np.mean([math.log(abs(eigen_pm(mats[k])[1])) for k in quarter])))
    log_norms = ls + np.log(np.max(np.abs(vs), axis=1))
    q = 3 * n_max // 4
    empirical = math.exp((log_norms[n_max] - log_norms[q]) / (n_max - q))
    logger.info("minimal solution: decay per period %.10g (empirical %.10g)", decay, empirical)
    trace = SolutionTrace(grid=t + params.omega * np.arange(n_max + 1), values=vs, log_scales=ls, z=z,
                          eta=None, frame=frame)
    return MinimalSolution(trace=trace, decay_rate=decay, empirical_rate=empirical, initial=vs[0],
                           n_max=n_max, buffer=buffer)


def lyapunov_exponent(params: SLParams, z: complex, n_max: int, tol: float = DEFAULT_TOL) -> float:
    """Growth rate per unit length of a generic solution over n_max periods."""
    if n_max < 1:
        raise ParameterError(f"n_max must be at least 1, got {n_max!r}.")
    trace = propagate_vector(params, np.array([1.0, 1.0]) / math.sqrt(2), [0.0, n_max * params.omega], z,
                             Frame.PDPRIME, tol)
    end = trace.values[-1]
    return (trace.log_scales[-1] + math.log(float(np.max(np.abs(end)))) - math.log(1 / math.sqrt(2))) / (n_max * params.omega)


def wronskian(a: SolutionTrace, b: SolutionTrace, params: SLParams) -> np.ndarray:
    """u_a (pu')_b - (pu')_a u_b on the common grid of two traces in the same frame."""
    if a.frame is not b.frame:
        raise ParameterError("Both traces must be in the same frame.")
    if a.grid.shape != b.grid.shape or not np.allclose(a.grid, b.grid):
        raise ParameterError("Both traces must share their grid.")
    cross = a.values[:, 0] * b.values[:, 1] - a.values[:, 1] * b.values[:, 0]
    if a.frame is Frame.DPRIME:
        cross = cross * np.array([params.check_positive(x) for x in a.grid])
    return cross * np.exp(a.log_scales + b.log_scales)


def envelope_bounds(seq: SolutionSeq, params: SLParams) -> Tuple[float, float]:
    """min and max over n of sqrt(p_n(t)) ||u_n|| (DPrime), or of ||u_n|| (PDPrime)."""
    logs = seq.log_norms()
    if seq.frame is Frame.DPRIME:
        logs = logs + 0.5 * np.log([params.check_positive(seq.t + n * params.omega) for n in range(len(seq))])
    return float(np.exp(np.min(logs))), float(np.exp(np.max(logs)))


def product_identity_defect(params: SLParams, t: float, z: float, m: int, n: int,
                            tol: float = DEFAULT_TOL) -> float:
    """|p_n prod_{k=m}^{n-1} |lambda_k^+|^2 / p_m - 1| for DPrime shift matrices."""
    if not 0 <= m < n:
        raise ParameterError(f"Need 0 <= m < n, got m={m!r}, n={n!r}.")
    log_sum = 0.0
    for k in range(m, n):
        start = t + k * params.omega
        X = transfer_matrix(params, start, start + params.omega, z, Frame.DPRIME, tol)
        log_sum += 2 * math.log(abs(eigen_pm(X)[0]))
    p_m, p_n = params.check_positive(t + m * params.omega), params.check_positive(t + n * params.omega)
    return abs(math.exp(math.log(p_n) + log_sum - math.log(p_m)) - 1.0)
