import math
from typing import Dict

from slspectra.core import CoefficientFn, Family, ModulationKind, SLParams, Smoothness
from slspectra.errors import ParameterError
from slspectra.families.utils.checks import TWO_PI, require_finite, require_period_multiple

T_STAR = math.exp(math.e)  # p is prescribed only beyond e^e


class Example5Family(Family):
    """Modulated parameters whose p oscillates between t^a and t^b, so p is not regularly varying.

    For t >= e^e, p(t) = exp(((a+b)/2) log t + ((b-a)/2) log t sin(log log t)).
    Below e^e, p is held at the constant p(e^e) up to e^e - 1 and then joined by a C^1
    cubic Hermite ramp that matches p and p' at e^e. q = p (-c + sin t), w = 1.
    """
    name = "example5"
    modulation_kind = ModulationKind.PERIODICALLY_MODULATED

    def __init__(self, a: float, b: float, c: float = 0.0, omega: float = TWO_PI):
        """
        Args:
            a (float): lower exponent, 0 < a < b.
            b (float): upper exponent, b < 1.
            c (float): constant shift of the periodic potential -c + sin t.
            omega (float): period, a positive multiple of 2*pi.
        """
        self.a, self.b = require_finite("a", a), require_finite("b", b)
        if not 0 < self.a < self.b < 1:
            raise ParameterError(f"Exponents must satisfy 0 < a < b < 1, got a={self.a!r}, b={self.b!r}.")
        self.c = require_finite("c", c)
        self.omega = require_period_multiple(omega)
        self.p_star = self._p_outer(T_STAR)
        self.slope_star = self._p_outer_prime(T_STAR)

    def parameters(self) -> Dict[str, float]: return {"a": self.a, "b": self.b, "c": self.c, "omega": self.omega}

    def _p_outer(self, t: float) -> float:
        log_t = math.log(t)
        return math.exp(0.5 * (self.a + self.b) * log_t + 0.5 * (self.b - self.a) * log_t * math.sin(math.log(log_t)))

    def _p_outer_prime(self, t: float) -> float:
        ell = math.log(math.log(t))
        return self._p_outer(t) / t * (0.5 * (self.a + self.b) + 0.5 * (self.b - self.a) * (math.sin(ell) + math.cos(ell)))

    def p(self, t: float) -> float:
        if t >= T_STAR:
            return self._p_outer(t)
        tau = t - (T_STAR - 1.0)
        if tau <= 0:
            return self.p_star
        return self.p_star + self.slope_star * (tau ** 3 - tau ** 2)

    def p_prime(self, t: float) -> float:
        if t >= T_STAR:
            return self._p_outer_prime(t)
        tau = t - (T_STAR - 1.0)
        if tau <= 0:
            return 0.0
        return self.slope_star * (3 * tau ** 2 - 2 * tau)

    def limit_q(self, t: float) -> float: return -self.c + math.sin(t)

    def q(self, t: float) -> float: return self.p(t) * self.limit_q(t)

    def build(self) -> SLParams:
        kinks = (T_STAR - 1.0, T_STAR)
        limit = (CoefficientFn.constant(1.0, "limit p"), CoefficientFn.constant(0.0, "limit p'"),
                 CoefficientFn(self.limit_q, name="limit q"), CoefficientFn.constant(1.0, "limit w"))
        return SLParams(p=CoefficientFn(self.p, smoothness=Smoothness.PIECEWISE_SMOOTH, isolated=kinks, name="p"),
                        p_prime=CoefficientFn(self.p_prime, smoothness=Smoothness.PIECEWISE_SMOOTH, isolated=kinks, name="p'"),
                        q=CoefficientFn(self.q, smoothness=Smoothness.PIECEWISE_SMOOTH, isolated=kinks, name="q"),
                        w=CoefficientFn.constant(1.0, "w"), omega=self.omega, periodic_limit=limit,
                        modulation_kind=self.modulation_kind, name=self.name)
