from typing import Dict

from slspectra.core import CoefficientFn, Family, ModulationKind, SLParams
from slspectra.families.utils.checks import require_finite, require_positive_period


class ConstantQFamily(Family):
    """p = w = 1, q = q0 everywhere."""
    name = "constant-q"
    modulation_kind = ModulationKind.EXACTLY_PERIODIC

    def __init__(self, q0: float, omega: float):
        """
        Args:
            q0 (float): the constant potential.
            omega (float): bookkeeping period.
        """
        self.q0 = require_finite("q0", q0)
        self.omega = require_positive_period(omega)

    def parameters(self) -> Dict[str, float]: return {"q0": self.q0, "omega": self.omega}

    def build(self) -> SLParams:
        p, pp = CoefficientFn.constant(1.0, "p"), CoefficientFn.constant(0.0, "p'")
        q, w = CoefficientFn.constant(self.q0, "q"), CoefficientFn.constant(1.0, "w")
        return SLParams(p=p, p_prime=pp, q=q, w=w, omega=self.omega, periodic_limit=(p, pp, q, w),
                        modulation_kind=self.modulation_kind, name=self.name)
