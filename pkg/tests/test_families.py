import math
import pickle
from dataclasses import replace

import numpy as np
import pytest

from slspectra import BoundaryFrame, BoundaryVector, CoefficientFn, ModulationKind, ParameterError, make_family, register, registered_families
from slspectra.core import Constant
from slspectra.families.Example5.family import T_STAR
from slspectra.families.utils.diagnostics import carleman_rho, liouville_inverse, liouville_map, liouville_potential, stolz_defect

from conftest import TWO_PI


def test_builtin_families_are_registered():
    assert {"free", "constant-q", "example2", "example4", "example5", "appendix-asymptotic"} <= set(registered_families())


def test_register_rejects_duplicates():
    with pytest.raises(ValueError):
        register(id="free", entry_point="slspectra.families.Free.family:FreeFamily")


def test_unknown_family():
    with pytest.raises(ParameterError):
        make_family("no-such-family")


def test_example2_coefficients():
    params = make_family("example2", kappa=0.5, c=0.0, omega=TWO_PI)
    assert params.modulation_kind is ModulationKind.PERIODICALLY_MODULATED
    assert params.p(0.0) == pytest.approx(4.0)
    assert params.p(3.0) == pytest.approx(16.0)
    limit = params.limit()
    assert limit.p(100.0) == pytest.approx(4.0)
    assert limit.q(math.pi / 2) == pytest.approx(1.0)


@pytest.mark.parametrize("kappa", [0.0, -0.2, 1.5])
def test_example2_kappa_range(kappa):
    with pytest.raises(ParameterError, match="kappa"):
        make_family("example2", kappa=kappa, c=0.0, omega=TWO_PI)


def test_example2_period_must_be_multiple_of_two_pi():
    with pytest.raises(ParameterError, match="omega"):
        make_family("example2", kappa=0.5, c=0.0, omega=3.0)


def test_example4_fixes_the_period():
    params = make_family("example4", kappa=0.5, c=1.0)
    assert params.omega == pytest.approx(TWO_PI)
    assert params.family_params == {"omega": TWO_PI, "kappa": 0.5, "c": 1.0}
    with pytest.raises(ParameterError, match="fixed"):
        make_family("example4", kappa=0.5, c=1.0, omega=2 * TWO_PI)


def test_example5_envelope():
    params = make_family("example5", a=0.2, b=0.6)
    for t in np.geomspace(T_STAR, 1e8, 50):
        assert t ** 0.2 * (1 - 1e-12) <= params.p(t) <= t ** 0.6 * (1 + 1e-12)
    assert params.p(T_STAR - 1e-9) == pytest.approx(params.p(T_STAR), rel=1e-6)
    assert params.p(1.0) == pytest.approx(params.p(0.0))


def test_example5_exponent_order():
    with pytest.raises(ParameterError):
        make_family("example5", a=0.6, b=0.2)


def test_appendix_weight():
    params = make_family("appendix-asymptotic")
    assert params.w(1.0) == 2.0
    t = 1e4
    assert params.w(t) == pytest.approx(2 + math.sin(math.log(math.log(t))) / math.log(t))
    assert params.limit().w(t) == 2.0


def test_params_survive_pickling(example4):
    clone = pickle.loads(pickle.dumps(example4))
    assert clone.p(5.0) == example4.p(5.0)
    assert clone.q(5.0) == example4.q(5.0)


def test_boundary_vector_frames(example4, free):
    eta = BoundaryVector.for_params(free, 3.0, 4.0)
    assert eta.as_tuple() == pytest.approx((0.6, 0.8))
    eta = BoundaryVector.for_params(example4, 0.0, 1.0)
    assert eta.frame is BoundaryFrame.STILDE
    assert eta.eta2 == pytest.approx(0.25)
    assert eta.pd_vector() == pytest.approx([0.0, 1.0])
    with pytest.raises(ParameterError):
        BoundaryVector(1.0, 1.0)
    with pytest.raises(ParameterError):
        BoundaryVector.for_params(free, 0.0, 0.0)


def test_breakpoints_include_p_prime(free):
    p_prime = CoefficientFn(Constant(0.0), breakpoints=(0.3,), isolated=(0.7,), name="p'")
    params = replace(free, p_prime=p_prime)
    assert params.breakpoints_between(0.0, 2.0) == pytest.approx([0.3, 0.7, 1.3])
    assert free.breakpoints_between(0.0, 2.0) == []
    with pytest.raises(ParameterError):
        replace(free, p_prime=CoefficientFn(Constant(0.0), breakpoints=(1.5,), name="p'"))


def test_carleman_rho():
    free = make_family("free", omega=1.0)
    assert carleman_rho(free, 7.5) == pytest.approx(7.5)
    params = make_family("example2", kappa=0.5, c=0.0, omega=TWO_PI)
    # w/p = 1 / (4 (1 + t))
    assert carleman_rho(params, 50.0) == pytest.approx(math.log(51.0) / 4, rel=1e-9)


def test_stolz_defect_of_periodic_parameters_vanishes():
    params = make_family("constant-q", q0=2.0, omega=1.0)
    assert np.allclose(stolz_defect(params, "q/p", 5), 0.0)


def test_liouville_transform(example4):
    x = liouville_map(example4, 8.0)
    assert x == pytest.approx(2.0)
    assert liouville_inverse(example4, x) == pytest.approx(8.0)
    assert liouville_potential(example4, 2.0) == pytest.approx(9.0 * math.sin(8.0))
    with pytest.raises(ParameterError):
        liouville_map(make_family("free", omega=1.0), 1.0)
