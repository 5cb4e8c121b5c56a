import math
from typing import Dict

from slspectra.core import CoefficientFn, Family, ModulationKind, SLParams
from slspectra.errors import ParameterError
from slspectra.families.utils.checks import require_finite, require_period_multiple


class Example2Family(Family):
    """Periodically modulated parameters growing like (1+t)^(2 kappa) with limit q = -c + sin t.

    p(t) = c_k^2 (1+t)^(2k), q(t) = (1+t)^(2k) (-c + sin t) + q_cor(t), w = 1, where the
    correction q_cor makes the Liouville transform an exact Schrodinger operator.
    """
    name = "example2"
    modulation_kind = ModulationKind.PERIODICALLY_MODULATED

    def __init__(self, kappa: float, c: float, omega: float):
        """
        Args:
            kappa (float): growth exponent in (0, 1].
            c (float): constant shift of the periodic potential -c + sin t.
            omega (float): period, a positive multiple of 2*pi.
        """
        self.kappa = require_finite("kappa", kappa)
        if not 0 < self.kappa <= 1:
            raise ParameterError(f"kappa must lie in (0, 1], got {self.kappa!r}.")
        self.c = require_finite("c", c)
        self.omega = require_period_multiple(omega)
        self.c_kappa = 1.0 / (1.0 - self.kappa) if self.kappa < 1 else 1.0

    def parameters(self) -> Dict[str, float]: return {"kappa": self.kappa, "c": self.c, "omega": self.omega}

    # coefficients
    def p(self, t: float) -> float: return self.c_kappa ** 2 * (1.0 + t) ** (2 * self.kappa)

    def p_prime(self, t: float) -> float: return 2 * self.kappa * self.c_kappa ** 2 * (1.0 + t) ** (2 * self.kappa - 1)

    def q_cor(self, t: float) -> float:
        if self.kappa < 1:
            return -(self.c_kappa ** 2 / 4.0) * self.kappa * (3 * self.kappa - 2) * (1.0 + t) ** (2 * self.kappa - 2)
        return -self.c_kappa ** 2 / 4.0

    def q(self, t: float) -> float: return (1.0 + t) ** (2 * self.kappa) * self.limit_q(t) + self.q_cor(t)

    def limit_q(self, t: float) -> float: return -self.c + math.sin(t)

    # Liouville transform
    def liouville_x(self, t: float) -> float:
        return (1.0 + t) ** (1 - self.kappa) - 1.0 if self.kappa < 1 else math.log1p(t)

    def liouville_t(self, x: float) -> float:
        return (1.0 + x) ** (1.0 / (1 - self.kappa)) - 1.0 if self.kappa < 1 else math.expm1(x)

    def potential(self, x: float) -> float:
        t = self.liouville_t(x)
        return (1.0 + t) ** (2 * self.kappa) * self.limit_q(t)

    def build(self) -> SLParams:
        limit = (CoefficientFn.constant(self.c_kappa ** 2, "limit p"), CoefficientFn.constant(0.0, "limit p'"),
                 CoefficientFn(self.limit_q, name="limit q"), CoefficientFn.constant(1.0, "limit w"))
        return SLParams(p=CoefficientFn(self.p, name="p"), p_prime=CoefficientFn(self.p_prime, name="p'"),
                        q=CoefficientFn(self.q, name="q"), w=CoefficientFn.constant(1.0, "w"), omega=self.omega,
                        periodic_limit=limit, modulation_kind=self.modulation_kind, name=self.name)
