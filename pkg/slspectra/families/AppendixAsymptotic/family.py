import math
from typing import Dict

from slspectra.core import CoefficientFn, Family, ModulationKind, SLParams, Smoothness
from slspectra.families.utils.checks import require_positive_period

T_STAR = math.exp(math.e)


class AppendixAsymptoticFamily(Family):
    """p = q = 1 and w = 2 + sin(log log t)/log t beyond e^e: asymptotically periodic with limit (1, 1, 2)."""
    name = "appendix-asymptotic"
    modulation_kind = ModulationKind.ASYMPTOTICALLY_PERIODIC

    def __init__(self, omega: float = 1.0):
        """
        Args:
            omega (float): any positive period; the limit is constant.
        """
        self.omega = require_positive_period(omega)

    def parameters(self) -> Dict[str, float]: return {"omega": self.omega}

    def w(self, t: float) -> float:
        if t > T_STAR:
            log_t = math.log(t)
            return 2.0 + math.sin(math.log(log_t)) / log_t
        return 2.0

    def build(self) -> SLParams:
        p, pp, q = CoefficientFn.constant(1.0, "p"), CoefficientFn.constant(0.0, "p'"), CoefficientFn.constant(1.0, "q")
        w = CoefficientFn(self.w, smoothness=Smoothness.PIECEWISE_SMOOTH, isolated=(T_STAR,), name="w")
        return SLParams(p=p, p_prime=pp, q=q, w=w, omega=self.omega,
                        periodic_limit=(p, pp, q, CoefficientFn.constant(2.0, "limit w")),
                        modulation_kind=self.modulation_kind, name=self.name)
