""" Eigenvalue pairs of 2x2 matrices, case classification at z = 0, band structure and trace scans """

import cmath
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from slspectra.core import Frame, Mat2, ModulationKind, SLParams
from slspectra.errors import DegenerateSpectrumError, NotInBandError, ParameterError, PivotError, SLSpectraError
from slspectra.transfer import DEFAULT_TOL, monodromy, monodromy_pair

logger = logging.getLogger(__name__)

EPS_CASE = 1e-6
DELTA = 1e-3
DEGENERATE_TOL = 1e-12
EDGE_TOL = 1e-9
SCAN_POINTS = 2000
TOUCH_TOL = 1e-7  # |2 - |tr|| at a stationary point below which the gap is treated as closed


class Case(Enum):
    I = "I"
    IIA = "IIa"
    IIB = "IIb"
    III = "III"


@dataclass(frozen=True)
class CaseLabel:
    tag: Case
    trace_value: float
    distance_to_boundary: float
    marginal: bool = False  # set for IIa/IIb: decided inside the numerical collar

    def __str__(self) -> str:
        return f"Case {self.tag.value}" + (" (numerically marginal)" if self.marginal else "")


@dataclass
class BandList:
    """Maximal open intervals of [lambda_min, lambda_max] on which |tr T(omega; lambda)| < 2."""
    intervals: List[Tuple[float, float]]
    resolution: float
    edge_tol: float = EDGE_TOL

    def __len__(self) -> int: return len(self.intervals)

    def __iter__(self): return iter(self.intervals)

    def contains(self, lam: float) -> bool: return any(lo < lam < hi for lo, hi in self.intervals)

    def edges(self) -> List[float]: return sorted({x for interval in self.intervals for x in interval})


def discr(M: Mat2) -> complex:
    """(tr M)^2 - 4 det M."""
    return complex(M.discr)


def xi_pm(v: complex) -> Tuple[complex, complex]:
    """The two roots of xi^2 - 2 v xi + 1 = 0, xi_+ taken from the upper half-plane branch.

    xi_+ = v + sqrt(v - 1) sqrt(v + 1) with principal square roots; on (-1, 1) this is the limit
    from C_+, i.e. v + i sqrt(1 - v^2).
    """
    v = complex(v)
    if v.imag == 0.0:
        v = complex(v.real, 0.0)  # -0.0 would select the lower branch
    xp = v + cmath.sqrt(v - 1) * cmath.sqrt(v + 1)
    return xp, 1.0 / xp


def eigen_pm(X: Mat2) -> Tuple[complex, complex]:
    """Eigenvalues (lambda_+, lambda_-) = sqrt(det X) xi_pm(tr X / (2 sqrt(det X))).

    Raises:
        DegenerateSpectrumError: if |discr X| < 1e-12.
    """
    d = discr(X)
    if abs(d) < DEGENERATE_TOL:
        raise DegenerateSpectrumError(f"discr = {d!r}: eigenvalues coincide.")
    det = complex(X.det)
    if det.imag != 0.0 or det.real <= 0:
        logger.debug("det X = %r is not positive; using the principal square root", det)
    root = cmath.sqrt(det)
    xp, xm = xi_pm(complex(X.trace) / (2 * root))
    return root * xp, root * xm


def diagonalize(X: Mat2, delta: float = DELTA) -> Tuple[Mat2, Mat2]:
    """X = C D C^{-1} with C = [[1, 1], [(l+ - X11)/X12, (l- - X11)/X12]] and D = diag(l+, l-).

    Raises:
        PivotError: if |X12| <= delta.
        DegenerateSpectrumError: if |discr X| <= delta.
    """
    if abs(X.a12) <= delta:
        raise PivotError(f"|X12| = {abs(X.a12):.3g} <= delta = {delta:g}.")
    if abs(discr(X)) <= delta:
        raise DegenerateSpectrumError(f"|discr X| = {abs(discr(X)):.3g} <= delta = {delta:g}.")
    lp, lm = eigen_pm(X)
    C = Mat2(np.array([[1.0, 1.0], [(lp - X.a11) / X.a12, (lm - X.a11) / X.a12]], dtype=complex))
    return C, Mat2(np.diag([lp, lm]))


def classify(params: SLParams, frame: Optional[Frame] = None, eps_case: float = EPS_CASE,
             tol: float = DEFAULT_TOL) -> CaseLabel:
    """Case I/IIa/IIb/III of the periodic limit from tr T(omega; 0).

    Args:
        params: any family; only the periodic limit is used.
        frame: frame of the monodromy used for the IIa test.
        eps_case: half-width of the collar around |tr| = 2.

    Returns:
        CaseLabel: with the trace and |2 - |tr||.
    """
    if not eps_case > 0:
        raise ParameterError(f"eps_case must be positive, got {eps_case!r}.")
    T = monodromy(params, 0.0, frame, tol)
    tr = float(np.real(T.trace))
    distance = abs(2.0 - abs(tr))
    if abs(tr) < 2.0 - eps_case:
        return CaseLabel(Case.I, tr, distance)
    if abs(tr) > 2.0 + eps_case:
        return CaseLabel(Case.III, tr, distance)
    sign = math.copysign(1.0, tr)
    tag = Case.IIA if (T - Mat2(sign * np.eye(2))).max_norm() < eps_case else Case.IIB
    logger.warning("%s: tr T(omega; 0) = %.12g lies in the critical collar, label %s is numerically marginal",
                   params.name, tr, tag.value)
    return CaseLabel(tag, tr, distance, marginal=True)


def case_verdict(label: CaseLabel, kappa: Optional[float] = None) -> str:
    """Spectral verdict for the growth-exponent families; the bare label when kappa is unknown."""
    if label.tag is Case.III:
        return f"{label}: all self-adjoint extensions have no essential spectrum"
    if label.tag is Case.I and kappa is not None:
        return f"{label}: " + ("σ_ac(H_η) = ℝ" if kappa <= 0.5 else "τ is limit circle at +∞")
    if label.tag in (Case.IIA, Case.IIB):
        return f"{label}: critical case, spectral analysis deferred"
    return str(label)


def in_validity_region(params: SLParams, lam: complex = 0.0, tol: float = DEFAULT_TOL) -> bool:
    """Case I for modulated parameters, lambda in the open bands of the limit otherwise."""
    if params.modulation_kind is ModulationKind.PERIODICALLY_MODULATED:
        return classify(params, tol=tol).tag is Case.I
    lam = complex(lam)
    if lam.imag != 0.0:
        return True
    # collar keeps touching band edges (tr = ±2, discr = 0 up to rounding) outside
    return abs(monodromy(params, lam.real, Frame.PDPRIME, tol).trace.real) < 2.0 - EPS_CASE


def require_validity(params: SLParams, lam: complex = 0.0, tol: float = DEFAULT_TOL):
    if not in_validity_region(params, lam, tol):
        if params.modulation_kind is ModulationKind.PERIODICALLY_MODULATED:
            raise NotInBandError(f"{params.name} is not in Case I.")
        raise NotInBandError(f"lambda = {complex(lam).real!r} is not in the bands of {params.name}.")


def _trace_pair(limit: SLParams, lam: float, tol: float) -> Tuple[float, float]:
    T, dT = monodromy_pair(limit, lam, Frame.PDPRIME, tol)
    return float(np.real(T.trace)), float(np.real(dT.trace))


def _trace(limit: SLParams, lam: float, tol: float) -> float:
    return float(np.real(monodromy(limit, lam, Frame.PDPRIME, tol).trace))


def _cell_edges(limit: SLParams, lo: float, hi: float, g_lo: Tuple[float, float], g_hi: Tuple[float, float],
                edge_tol: float, tol: float) -> List[float]:
    """Points in [lo, hi] where |tr| = 2: simple crossings, or a stationary point touching +-2."""
    (tr_lo, d_lo), (tr_hi, d_hi) = g_lo, g_hi
    pieces = [(lo, tr_lo, hi, tr_hi)]
    edges: List[float] = []
    if d_lo * d_hi < 0:
        star = brentq(lambda x: _trace_pair(limit, x, tol)[1], lo, hi, xtol=edge_tol)
        tr_star = _trace(limit, star, tol)
        if abs(2.0 - abs(tr_star)) < TOUCH_TOL:
            return [star]
        pieces = [(lo, tr_lo, star, tr_star), (star, tr_star, hi, tr_hi)]
    for a, fa, b, fb in pieces:
        for target in (2.0, -2.0):
            if (fa - target) * (fb - target) <= 0 and fa != fb:
                edges.append(brentq(lambda x: _trace(limit, x, tol) - target, a, b, xtol=edge_tol))
    return edges


def bands(params: SLParams, lambda_min: float, lambda_max: float, scan_step: Optional[float] = None,
          edge_tol: float = EDGE_TOL, tol: float = DEFAULT_TOL) -> BandList:
    """Band structure of the periodic limit on [lambda_min, lambda_max].

    Scans tr T(omega; lambda) and its lambda-derivative, brackets the points where |tr| = 2
    (including gaps that close at a stationary point) and refines them with brentq to edge_tol.
    Bands cut by the range ends are reported truncated.
    """
    if not lambda_min < lambda_max:
        raise ParameterError(f"Need lambda_min < lambda_max, got [{lambda_min!r}, {lambda_max!r}].")
    step = scan_step if scan_step is not None else (lambda_max - lambda_min) / SCAN_POINTS
    if not step > 0:
        raise ParameterError(f"scan_step must be positive, got {scan_step!r}.")
    limit = params.limit()
    n_cells = max(1, math.ceil((lambda_max - lambda_min) / step - 1e-9))
    grid = np.linspace(lambda_min, lambda_max, n_cells + 1)
    values = [_trace_pair(limit, float(lam), tol) for lam in grid]

    edges: List[float] = []
    for i in range(n_cells):
        edges.extend(_cell_edges(limit, float(grid[i]), float(grid[i + 1]), values[i], values[i + 1], edge_tol, tol))
    unique: List[float] = []
    for x in sorted(edges):
        if not unique or x - unique[-1] > 10 * edge_tol:
            unique.append(x)

    points = [lambda_min] + [x for x in unique if lambda_min < x < lambda_max] + [lambda_max]
    intervals = [(a, b) for a, b in zip(points, points[1:])
                 if b > a and abs(_trace(limit, 0.5 * (a + b), tol)) < 2.0]
    logger.debug("%s: %d bands in [%g, %g] at step %g", params.name, len(intervals), lambda_min, lambda_max, step)
    return BandList(intervals=intervals, resolution=step, edge_tol=edge_tol)


@dataclass
class TraceScan:
    """tr T(omega; 0) along one family parameter; NaN marks points whose integration failed."""
    family: str
    param: str
    points: np.ndarray
    traces: np.ndarray
    failures: Dict[float, str] = field(default_factory=dict)

    def series(self) -> List[Tuple[float, float]]: return list(zip(self.points.tolist(), self.traces.tolist()))

    def brackets(self, target: float = -2.0) -> List[Tuple[float, float]]:
        """Consecutive finite points between which trace - target changes sign."""
        out = []
        for (x0, y0), (x1, y1) in zip(self.series(), self.series()[1:]):
            if math.isfinite(y0) and math.isfinite(y1) and (y0 - target) * (y1 - target) < 0:
                out.append((x0, x1))
        return out


def _trace_at(family: str, params: Mapping[str, float], tol: float) -> Tuple[float, Optional[str]]:
    from slspectra.families import make_family
    try:
        return float(np.real(monodromy(make_family(family, params), 0.0, tol=tol).trace)), None
    except SLSpectraError as e:
        return math.nan, str(e)


def trace_scan(family: str, sweep: Tuple[str, float, float, int], fixed: Optional[Mapping[str, float]] = None,
               tol: float = DEFAULT_TOL, jobs: int = 1) -> TraceScan:
    """tr T(omega; 0) for each point of a linear sweep of one family parameter.

    Args:
        family: registry id.
        sweep: (parameter name, lo, hi, count) with count >= 2.
        fixed: the remaining family parameters.
        jobs: worker processes; points are independent.
    """
    name, lo, hi, count = sweep
    if count < 2:
        raise ParameterError(f"A sweep needs at least 2 points, got {count!r}.")
    fixed = dict(fixed or {})
    if name in fixed:
        raise ParameterError(f"Parameter {name} is both swept and fixed.")
    points = np.linspace(lo, hi, count)
    items = [{**fixed, name: float(x)} for x in points]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_trace_at, [family] * count, items, [tol] * count))
    else:
        results = [_trace_at(family, item, tol) for item in items]
    failures = {float(x): msg for x, (_, msg) in zip(points, results) if msg is not None}
    for x, msg in failures.items():
        logger.warning("trace scan %s=%g failed: %s", name, x, msg)
    return TraceScan(family=family, param=name, points=points,
                     traces=np.array([value for value, _ in results]), failures=failures)


def critical_parameter(family: str, param: str, lo: float, hi: float, fixed: Optional[Mapping[str, float]] = None,
                       target: float = -2.0, xtol: float = 1e-10, tol: float = DEFAULT_TOL) -> float:
    """The parameter value in [lo, hi] where tr T(omega; 0) = target; [lo, hi] must bracket it."""
    from slspectra.families import make_family
    fixed = dict(fixed or {})

    def f(x: float) -> float:
        return float(np.real(monodromy(make_family(family, {**fixed, param: x}), 0.0, tol=tol).trace)) - target

    f_lo, f_hi = f(lo), f(hi)
    if f_lo * f_hi > 0:
        raise ParameterError(f"tr - ({target}) has the same sign at {param}={lo} and {param}={hi}.")
    return brentq(f, lo, hi, xtol=xtol)


def critical_parameters(scan: TraceScan, fixed: Optional[Mapping[str, float]] = None, target: float = -2.0,
                        xtol: float = 1e-10, tol: float = DEFAULT_TOL) -> List[float]:
    """Refine every sign change of trace - target found in a scan."""
    return [critical_parameter(scan.family, scan.param, a, b, fixed, target, xtol, tol)
            for a, b in scan.brackets(target)]


def a_crit(kappa: float) -> float:
    """a = 2 kappa / (1 - kappa): the growth exponent of the Schrodinger potential."""
    if not 0 < kappa < 1:
        raise ParameterError(f"kappa must lie in (0, 1), got {kappa!r}.")
    return 2 * kappa / (1 - kappa)


def limit_phase(params: SLParams, lam: float = 0.0, tol: float = DEFAULT_TOL) -> Optional[float]:
    """theta_inf = arccos(tr / (2 sqrt(det))) of the limit monodromy, None outside the elliptic range."""
    z = 0.0 if params.modulation_kind is ModulationKind.PERIODICALLY_MODULATED else lam
    T = monodromy(params, z, Frame.PDPRIME, tol)
    v = float(np.real(T.trace)) / (2 * math.sqrt(float(np.real(T.det))))
    return math.acos(v) if abs(v) < 1 else None
