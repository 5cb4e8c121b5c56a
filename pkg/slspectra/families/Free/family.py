from typing import Dict

from slspectra.core import CoefficientFn, Family, ModulationKind, SLParams
from slspectra.families.utils.checks import require_positive_period


class FreeFamily(Family):
    """p = w = 1, q = 0: the free operator -u'' with an arbitrary bookkeeping period."""
    name = "free"
    modulation_kind = ModulationKind.EXACTLY_PERIODIC

    def __init__(self, omega: float):
        """
        Args:
            omega (float): period used for monodromy and shift matrices.
        """
        self.omega = require_positive_period(omega)

    def parameters(self) -> Dict[str, float]: return {"omega": self.omega}

    def build(self) -> SLParams:
        one, zero = CoefficientFn.constant(1.0, "p"), CoefficientFn.constant(0.0, "p'")
        q, w = CoefficientFn.constant(0.0, "q"), CoefficientFn.constant(1.0, "w")
        return SLParams(p=one, p_prime=zero, q=q, w=w, omega=self.omega, periodic_limit=(one, zero, q, w),
                        modulation_kind=self.modulation_kind, name=self.name)
