import math

import numpy as np
import pytest

from slspectra import (Case, DegenerateSpectrumError, Frame, Mat2, NotInBandError, ParameterError, PivotError, bands,
                       case_verdict, classify, critical_parameter, diagonalize, discr, eigen_pm, make_family, monodromy,
                       trace_scan, xi_pm)
from slspectra.spectral_class import a_crit, critical_parameters, in_validity_region, limit_phase, require_validity
from slspectra.transfer import monodromy_pair


def test_xi_pm_branches():
    xp, xm = xi_pm(3.0)
    assert xp == pytest.approx(3 + 2 * math.sqrt(2))
    assert xm == pytest.approx(3 - 2 * math.sqrt(2))
    xp, xm = xi_pm(-3.0)
    assert xp == pytest.approx(-3 - 2 * math.sqrt(2))
    assert abs(xp) > 1 > abs(xm)
    xp, xm = xi_pm(0.0)
    assert xp == pytest.approx(1j)
    assert xm == pytest.approx(-1j)
    xp, _ = xi_pm(-0.5)
    assert xp.imag > 0


def test_xi_pm_identities_on_random_samples():
    rng = np.random.default_rng(11)
    samples = rng.uniform(-5, 5, 1000) + 1j * rng.uniform(-5, 5, 1000)
    for v in samples:
        xp, xm = xi_pm(v)
        assert xp * xm == pytest.approx(1.0, abs=1e-12)
        assert xp + xm == pytest.approx(2 * v, rel=1e-12, abs=1e-12)
        assert np.sign(xp.imag) == np.sign(v.imag)


def test_eigen_pm():
    X = Mat2.from_rows(2.0, 1.0, 0.0, 0.5)
    lp, lm = eigen_pm(X)
    assert lp == pytest.approx(2.0)
    assert lm == pytest.approx(0.5)
    assert discr(X) == pytest.approx(2.25)
    with pytest.raises(DegenerateSpectrumError):
        eigen_pm(Mat2.identity())


def test_diagonalize_reconstructs_matrix():
    X = Mat2.from_rows(0.3, 1.2, -0.9, 0.5)
    C, D = diagonalize(X)
    rebuilt = np.asarray(C) @ np.asarray(D) @ np.linalg.inv(np.asarray(C))
    assert np.allclose(rebuilt, np.asarray(X))


def test_diagonalize_errors():
    with pytest.raises(PivotError):
        diagonalize(Mat2.from_rows(2.0, 0.0, 1.0, 0.5))
    with pytest.raises(DegenerateSpectrumError):
        diagonalize(Mat2.from_rows(1.0, 1.0, 0.0, 1.0))


def test_classify_example4(example4, example4_gap):
    label = classify(example4)
    assert label.tag is Case.I
    assert label.trace_value == pytest.approx(0.77, abs=0.01)
    assert not label.marginal
    label = classify(example4_gap)
    assert label.tag is Case.III
    assert label.trace_value == pytest.approx(-2.61, abs=0.01)


def test_classify_critical_cases():
    label = classify(make_family("constant-q", q0=0.0, omega=math.pi))
    assert label.tag is Case.IIB
    assert label.marginal
    assert str(label) == "Case IIb (numerically marginal)"
    assert classify(make_family("constant-q", q0=-1.0, omega=math.pi)).tag is Case.IIA


def test_classify_rejects_bad_collar(example4):
    with pytest.raises(ParameterError):
        classify(example4, eps_case=0.0)


def test_case_verdicts(example4, example4_gap):
    assert case_verdict(classify(example4), kappa=0.5) == "Case I: σ_ac(H_η) = ℝ"
    assert case_verdict(classify(example4_gap), kappa=0.5).startswith("Case III: all self-adjoint extensions")
    label = classify(make_family("example4", kappa=0.75, c=0.0))
    if label.tag is Case.I:
        assert case_verdict(label, kappa=0.75) == "Case I: τ is limit circle at +∞"
    assert case_verdict(classify(example4)) == "Case I"


def test_validity_region(example4, example4_gap, free):
    assert in_validity_region(example4)
    assert not in_validity_region(example4_gap)
    with pytest.raises(NotInBandError):
        require_validity(example4_gap)
    assert in_validity_region(free, 1.0)
    assert not in_validity_region(free, -1.0)
    assert in_validity_region(free, -1.0 + 0.5j)
    touching = make_family("free", omega=math.pi)
    assert not in_validity_region(touching, 1.0)
    assert not in_validity_region(touching, 4.0)
    assert in_validity_region(touching, 2.0)


def test_free_bands():
    params = make_family("free", omega=math.pi)
    result = bands(params, -1.0, 10.0, scan_step=0.033)
    assert len(result) == 4
    assert result.edges() == pytest.approx([0.0, 1.0, 4.0, 9.0, 10.0], abs=1e-8)
    for edge in result.edges()[:-1]:
        assert abs(monodromy(params, edge).trace.real) == pytest.approx(2.0, abs=1e-7)
    assert result.contains(2.0)
    assert not result.contains(4.0)
    assert not result.contains(-0.5)


def test_bands_with_open_gaps():
    params = make_family("constant-q", q0=0.0, omega=1.0)
    # tr = 2 cos(sqrt(lam)) on lam > 0 and 2 cosh(sqrt(-lam)) below 0
    result = bands(params, -1.0, 5.0, scan_step=0.07)
    assert len(result) == 1
    lo, hi = result.intervals[0]
    assert lo == pytest.approx(0.0, abs=1e-6)
    assert hi == 5.0


def test_bands_periodic_limit(example4):
    result = bands(example4, -1.0, 2.0, scan_step=0.01)
    assert result.contains(0.0)


def test_bands_argument_checks(free):
    with pytest.raises(ParameterError):
        bands(free, 1.0, 1.0)
    with pytest.raises(ParameterError):
        bands(free, 0.0, 1.0, scan_step=-0.1)


@pytest.mark.parametrize("name, params", [
    ("free", {"omega": 1.0}),
    ("constant-q", {"q0": 1.0, "omega": 1.0}),
    ("example4", {"kappa": 0.5, "c": 0.0}),
    ("example4", {"kappa": 0.5, "c": 1.0}),
    ("example5", {"a": 0.2, "b": 0.6}),
    ("appendix-asymptotic", {}),
])
def test_trace_derivative_does_not_vanish_inside_bands(name, params):
    family = make_family(name, params)
    inside = 0
    for z in np.linspace(-5.0, 20.0, 100):
        T, dT = monodromy_pair(family, float(z), Frame.PDPRIME)
        if abs(T.trace.real) < 1.9:
            inside += 1
            assert abs(dT.trace) > 1e-6
    assert inside > 0


def test_trace_scan_matches_classification():
    scan = trace_scan("example4", ("c", 0.0, 1.0, 3), {"kappa": 0.5})
    assert scan.traces[0] == pytest.approx(0.77, abs=0.01)
    assert scan.traces[-1] == pytest.approx(-2.61, abs=0.01)
    assert not scan.failures
    assert scan.brackets(-2.0) == [(0.5, 1.0)] or scan.brackets(-2.0) == [(0.0, 0.5)]


def test_trace_scan_rejects_bad_sweeps():
    with pytest.raises(ParameterError):
        trace_scan("example4", ("c", 0.0, 1.0, 1), {"kappa": 0.5})
    with pytest.raises(ParameterError):
        trace_scan("example4", ("c", 0.0, 1.0, 3), {"kappa": 0.5, "c": 0.0})


def test_critical_kappa():
    kappa = critical_parameter("example4", "kappa", 0.3, 0.35, {"c": 0.0}, xtol=1e-6)
    assert kappa == pytest.approx(0.326, abs=0.005)
    assert a_crit(kappa) == pytest.approx(0.968, abs=0.01)


@pytest.mark.slow
def test_critical_kappa_from_scan():
    scan = trace_scan("example4", ("kappa", 0.05, 0.95, 91), {"c": 0.0}, jobs=2)
    roots = critical_parameters(scan, {"c": 0.0})
    assert any(abs(r - 0.326) < 0.005 for r in roots)


def test_critical_parameter_needs_a_bracket():
    with pytest.raises(ParameterError):
        critical_parameter("example4", "c", 0.0, 0.1, {"kappa": 0.5})


def test_a_crit():
    assert a_crit(0.5) == pytest.approx(2.0)
    with pytest.raises(ParameterError):
        a_crit(1.0)


def test_limit_phase(example4, example4_gap):
    assert limit_phase(example4) == pytest.approx(math.acos(0.385), abs=0.01)
    assert limit_phase(example4_gap) is None
