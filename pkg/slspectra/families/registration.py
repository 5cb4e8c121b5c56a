import importlib
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional, Union

from slspectra.core import Family, SLParams
from slspectra.errors import ParameterError


# Global family registry
FAMILY_REGISTRY: Dict[str, "FamilySpec"] = {}


@dataclass
class FamilySpec:
    """A specification for creating coefficient families."""
    id: str
    entry_point: Union[str, Callable[..., Family]]
    kwargs: Dict[str, Any] = field(default_factory=dict)

    def resolve(self) -> Callable[..., Family]:
        if not isinstance(self.entry_point, str):
            return self.entry_point
        module_path, class_name = self.entry_point.split(":")
        try:
            module = importlib.import_module(module_path)
            return getattr(module, class_name)
        except (ModuleNotFoundError, AttributeError) as e:
            raise ImportError(f"Could not import {module_path}.{class_name}. Error: {e}")

    def make(self, **kwargs) -> Family:
        """Create a family instance; preset kwargs cannot be overridden."""
        clash = sorted(set(kwargs) & set(self.kwargs))
        if clash:
            raise ParameterError(f"Parameters {clash} are fixed for family {self.id}.")
        return self.resolve()(**{**self.kwargs, **kwargs})


def register(id: str, entry_point: Union[str, Callable[..., Family]], **kwargs: Any):
    """Register a family with a given ID."""
    if id in FAMILY_REGISTRY:
        raise ValueError(f"Family {id} already registered.")
    FAMILY_REGISTRY[id] = FamilySpec(id=id, entry_point=entry_point, kwargs=kwargs)


def registered_families() -> List[str]:
    return sorted(FAMILY_REGISTRY)


def make_family(name: str, params: Optional[Mapping[str, float]] = None, **kwargs: float) -> SLParams:
    """Build the SLParams of a registered family.

    Args:
        name: registry id, e.g. "example2".
        params: parameter map using the config key names (kappa, c, omega, a, b, q0).

    Returns:
        SLParams: immutable, picklable parameters tagged with the family name.
    """
    if name not in FAMILY_REGISTRY:
        raise ParameterError(f"Family {name} not found in registry. Known families: {registered_families()}")
    merged = {**(params or {}), **kwargs}
    try:
        family = FAMILY_REGISTRY[name].make(**merged)
    except TypeError as e:  # unexpected or missing keyword
        raise ParameterError(f"Bad parameters for family {name}: {e}")
    built = family.build()
    return SLParams(p=built.p, p_prime=built.p_prime, q=built.q, w=built.w, omega=built.omega,
                    periodic_limit=built.periodic_limit, modulation_kind=built.modulation_kind,
                    name=name, family_params={**FAMILY_REGISTRY[name].kwargs, **family.parameters()})
