import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from slspectra.errors import CoefficientError, IntegrationError, ParameterError


NORMALIZATION_TOL = 1e-12  # boundary vectors must be unit in their declared frame


class Frame(Enum):
    DPRIME = "DPrime"  # propagates (u, u')
    PDPRIME = "PDPrime"  # propagates (u, p u')


class ModulationKind(Enum):
    EXACTLY_PERIODIC = "ExactlyPeriodic"
    PERIODICALLY_MODULATED = "PeriodicallyModulated"
    ASYMPTOTICALLY_PERIODIC = "AsymptoticallyPeriodic"


class Smoothness(Enum):
    SMOOTH = "smooth"
    PIECEWISE_SMOOTH = "piecewise-smooth"


class BoundaryFrame(Enum):
    STILDE = "Stilde"  # eta = (u(0), u'(0)) with |eta1|^2 + |p(0) eta2|^2 = 1
    S1 = "S1"  # eta = (u(0), p u'(0)) with eta1^2 + eta2^2 = 1


Real = float
Grid = np.ndarray


class Mat2:
    """A 2x2 complex (or real) matrix with the accessors used throughout the package."""

    __slots__ = ("entries",)

    def __init__(self, entries: Any):
        arr = np.asarray(entries)
        if arr.shape != (2, 2):
            raise ValueError(f"Mat2 needs a 2x2 array, got shape {arr.shape}.")
        if not np.all(np.isfinite(arr)):
            raise IntegrationError("Matrix has non-finite entries.")
        self.entries = arr

    @classmethod
    def identity(cls, dtype=float) -> "Mat2": return cls(np.eye(2, dtype=dtype))

    @classmethod
    def from_rows(cls, a11, a12, a21, a22) -> "Mat2": return cls(np.array([[a11, a12], [a21, a22]]))

    @property
    def a11(self): return self.entries[0, 0]

    @property
    def a12(self): return self.entries[0, 1]

    @property
    def a21(self): return self.entries[1, 0]

    @property
    def a22(self): return self.entries[1, 1]

    @property
    def trace(self) -> complex: return self.entries[0, 0] + self.entries[1, 1]

    @property
    def det(self) -> complex:
        e = self.entries
        return e[0, 0] * e[1, 1] - e[0, 1] * e[1, 0]

    @property
    def discr(self) -> complex: return self.trace ** 2 - 4 * self.det

    def inv(self) -> "Mat2":
        e, d = self.entries, self.det
        return Mat2(np.array([[e[1, 1], -e[0, 1]], [-e[1, 0], e[0, 0]]]) / d)

    def max_norm(self) -> float: return float(np.max(np.abs(self.entries)))

    def __matmul__(self, other):
        if isinstance(other, Mat2):
            return Mat2(self.entries @ other.entries)
        return self.entries @ np.asarray(other)

    def __sub__(self, other: "Mat2") -> "Mat2": return Mat2(self.entries - other.entries)

    def __getitem__(self, idx): return self.entries[idx]

    def __array__(self, dtype=None, copy=None): return np.asarray(self.entries, dtype=dtype)

    def __repr__(self) -> str: return f"Mat2({self.entries.tolist()!r})"


class Constant:
    """Picklable constant callable."""

    def __init__(self, value: float): self.value = float(value)

    def __call__(self, t: float) -> float: return self.value

    def __repr__(self) -> str: return f"Constant({self.value!r})"


@dataclass(frozen=True)
class CoefficientFn:
    """One coefficient t -> value, with the points where it loses smoothness.

    Args:
        func: the evaluable; must be pure so it can be shared across workers.
        breakpoints: kink/jump locations repeated every period, all in [0, omega).
        smoothness: declared regularity between breakpoints.
        isolated: absolute kink/jump locations that occur only once.
    """
    func: Callable[[float], float]
    breakpoints: Tuple[float, ...] = ()
    smoothness: Smoothness = Smoothness.SMOOTH
    isolated: Tuple[float, ...] = ()
    name: str = ""

    def __post_init__(self):
        for label, points in (("breakpoints", self.breakpoints), ("isolated", self.isolated)):
            if any(b <= a for a, b in zip(points, points[1:])):
                raise ParameterError(f"{self.name or 'coefficient'} {label} must be strictly increasing: {points}")

    def __call__(self, t: float) -> float: return self.func(t)

    @classmethod
    def constant(cls, value: float, name: str = "") -> "CoefficientFn": return cls(Constant(value), name=name)


@dataclass(frozen=True)
class SLParams:
    """Evaluable Sturm-Liouville parameters (p, q, w) together with their periodic limit."""
    p: CoefficientFn
    p_prime: CoefficientFn
    q: CoefficientFn
    w: CoefficientFn
    omega: float
    periodic_limit: Tuple[CoefficientFn, CoefficientFn, CoefficientFn, CoefficientFn]  # (p, p', q, w) of the limit
    modulation_kind: ModulationKind
    name: str = "custom"
    family_params: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise ParameterError(f"Period omega must be positive, got {self.omega!r}.")
        for coef in (self.p, self.p_prime, self.q, self.w, *self.periodic_limit):
            if coef.breakpoints and not (coef.breakpoints[0] >= 0 and coef.breakpoints[-1] < self.omega):
                raise ParameterError(f"Breakpoints of {coef.name} must lie in [0, omega).")

    @property
    def natural_frame(self) -> Frame:
        return Frame.DPRIME if self.modulation_kind is ModulationKind.PERIODICALLY_MODULATED else Frame.PDPRIME

    @property
    def natural_boundary_frame(self) -> BoundaryFrame:
        return BoundaryFrame.STILDE if self.modulation_kind is ModulationKind.PERIODICALLY_MODULATED else BoundaryFrame.S1

    def limit(self) -> "SLParams":
        """The periodic limit as exactly periodic parameters in their own right."""
        if self.modulation_kind is ModulationKind.EXACTLY_PERIODIC:
            return self
        lp, lpp, lq, lw = self.periodic_limit
        return SLParams(p=lp, p_prime=lpp, q=lq, w=lw, omega=self.omega, periodic_limit=self.periodic_limit,
                        modulation_kind=ModulationKind.EXACTLY_PERIODIC, name=f"{self.name}-limit",
                        family_params=dict(self.family_params))

    def breakpoints_between(self, t0: float, t1: float) -> List[float]:
        """Sorted coefficient breakpoints strictly inside (t0, t1)."""
        points = set()
        for coef in (self.p, self.p_prime, self.q, self.w):
            points.update(b for b in coef.isolated if t0 < b < t1)
            if coef.breakpoints:
                k0, k1 = math.floor(t0 / self.omega), math.ceil(t1 / self.omega)
                for k in range(k0, k1 + 1):
                    points.update(b + k * self.omega for b in coef.breakpoints if t0 < b + k * self.omega < t1)
        return sorted(points)

    def check_positive(self, t: float) -> float:
        value = self.p(t)
        if not (value > 0 and math.isfinite(value)):
            raise CoefficientError("p", t, value)
        return value


@dataclass(frozen=True)
class BoundaryVector:
    """Boundary condition at 0; eta2 is u'(0) in the Stilde frame and (p u')(0) in the S1 frame."""
    eta1: float
    eta2: float
    frame: BoundaryFrame = BoundaryFrame.S1
    p0: float = 1.0

    def __post_init__(self):
        if not self.p0 > 0:
            raise ParameterError(f"p(0) must be positive, got {self.p0!r}.")
        if abs(self.norm() - 1.0) > NORMALIZATION_TOL:
            raise ParameterError(f"Boundary vector ({self.eta1}, {self.eta2}) is not normalized in frame {self.frame.value}.")

    def norm(self) -> float:
        scale = self.p0 if self.frame is BoundaryFrame.STILDE else 1.0
        return math.hypot(self.eta1, scale * self.eta2)

    @classmethod
    def normalized(cls, eta1: float, eta2: float, frame: BoundaryFrame = BoundaryFrame.S1, p0: float = 1.0) -> "BoundaryVector":
        scale = p0 if frame is BoundaryFrame.STILDE else 1.0
        norm = math.hypot(eta1, scale * eta2)
        if norm == 0:
            raise ParameterError("Boundary vector must be non-zero.")
        return cls(eta1 / norm, eta2 / norm, frame, p0)

    @classmethod
    def for_params(cls, params: SLParams, eta1: float, eta2: float, frame: Optional[BoundaryFrame] = None) -> "BoundaryVector":
        """Normalize (eta1, eta2) in the natural frame of params (or the given one)."""
        return cls.normalized(eta1, eta2, frame or params.natural_boundary_frame, params.check_positive(0.0))

    def pd_vector(self) -> np.ndarray:
        """Initial data (u(0), p u'(0))."""
        if self.frame is BoundaryFrame.STILDE:
            return np.array([self.eta1, self.p0 * self.eta2])
        return np.array([self.eta1, self.eta2])

    def as_tuple(self) -> Tuple[float, float]: return (self.eta1, self.eta2)


@dataclass
class SolutionTrace:
    """Values of a solution on a grid, stored as values * exp(log_scales)."""
    grid: np.ndarray
    values: np.ndarray  # shape (N, 2): (u, u') or (u, p u') per frame
    log_scales: np.ndarray
    z: complex
    eta: Optional[BoundaryVector]
    frame: Frame

    def unscaled(self) -> np.ndarray: return self.values * np.exp(self.log_scales)[:, None]

    @property
    def u(self) -> np.ndarray: return self.unscaled()[:, 0]

    @property
    def deriv(self) -> np.ndarray: return self.unscaled()[:, 1]


class Family(ABC):
    """Base class of the builtin coefficient families.

    Subclasses validate their parameters in __init__ and expose the coefficients as methods,
    so the resulting SLParams stays picklable.
    """
    name: str = "family"
    modulation_kind: ModulationKind

    @abstractmethod
    def build(self) -> SLParams:
        """Assemble the SLParams of this family.

        Returns:
            SLParams: fully evaluable parameters with their periodic limit.
        """
        raise NotImplementedError

    @abstractmethod
    def parameters(self) -> Dict[str, float]:
        """Effective parameter values, defaults included."""
        raise NotImplementedError
