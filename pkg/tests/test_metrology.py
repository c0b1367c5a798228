import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qthermometry.channel import bloch_to_density
from qthermometry.metrology import (
    SingularityError,
    bound_ratio,
    classical_fisher_energy,
    crb_energy,
    energy_variance,
    equilibrium_energy_variance,
    equilibrium_hc,
    equilibrium_qfi,
    heat_capacity,
    is_divergent,
    mean_energy,
    metrology_report,
    qcrb,
    qfi_closed_form,
    qfi_from_sld,
    qfi_numeric_oracle,
    qfi_terms,
    root_fidelity,
    sld_coefficients,
    sld_residuals,
    thermal_linearity_ratio,
)
from qthermometry.model import EXCITED, GROUND, BlochState, DomainError, GadParams, evolve_bloch
from qthermometry.verification import random_cases

# 40-digit mpmath evaluations of the closed forms, frozen
Q_COHERENT = 0.029653772564165256177  # theta0 = pi/2, T = 2, gamma*tau = 1
C_COHERENT = 0.053716911952434008438
RATIO_COHERENT = 2.420237996219860666
Q_GROUND_025 = 0.059274116917055095781  # theta0 = pi, T = 2, gamma*tau = 0.25

COHERENT = BlochState.from_angles(math.pi / 2)


def test_goldens_coherent_preparation():
    p = GadParams(2.0, 1.0, 1.0)
    assert qfi_closed_form(COHERENT, p) == pytest.approx(Q_COHERENT, rel=1e-13)
    assert heat_capacity(COHERENT, p) == pytest.approx(C_COHERENT, rel=1e-13)
    assert bound_ratio(COHERENT, p) == pytest.approx(RATIO_COHERENT, rel=1e-12)
    assert qfi_numeric_oracle(COHERENT, p) == pytest.approx(Q_COHERENT, rel=1e-6)


def test_golden_ground_preparation():
    assert qfi_closed_form(GROUND, GadParams(2.0, 1.0, 0.25)) == pytest.approx(Q_GROUND_025, rel=1e-13)


def test_energy_statistics():
    assert mean_energy(EXCITED) == 0.5
    assert mean_energy(GROUND) == -0.5
    assert energy_variance(EXCITED) == 0.0
    assert energy_variance(BlochState(0, 0, 0)) == 0.25
    assert energy_variance(BlochState(1, 0, 0)) == 0.25


@pytest.mark.parametrize("T", [0.3, 1.0, 2.0, 5.0, 10.0])
def test_equilibrium_relations(T):
    var = equilibrium_energy_variance(T)
    assert var == pytest.approx(0.25 / math.cosh(0.5 / T) ** 2, rel=1e-13)
    assert equilibrium_qfi(T) == pytest.approx(var / T**4, rel=1e-15)
    assert equilibrium_hc(T) == pytest.approx(var / T**2, rel=1e-15)
    # long-time trajectory reproduces the Gibbs values for any preparation
    for theta in [0.0, math.pi / 4, math.pi / 2, math.pi]:
        p = GadParams(T, 1.0, 60.0)
        prep = BlochState.from_angles(theta)
        assert qfi_closed_form(prep, p) == pytest.approx(equilibrium_qfi(T), rel=1e-9)
        assert heat_capacity(prep, p) == pytest.approx(equilibrium_hc(T), rel=1e-9)
        assert abs(bound_ratio(prep, p) - 1) < 1e-9


def test_equilibrium_rejects_bad_temperature():
    with pytest.raises(DomainError):
        equilibrium_qfi(0.0)


def test_three_routes_on_random_mixed_states():
    for prep, p in random_cases(200, seed=11):
        q = qfi_closed_form(prep, p)
        assert qfi_from_sld(prep, p) == pytest.approx(q, rel=1e-9, abs=1e-15)
        if q > 1e-8:
            assert qfi_numeric_oracle(prep, p) == pytest.approx(q, rel=1e-5)


def test_sld_solves_its_defining_equations():
    for prep, p in random_cases(50, seed=12):
        if evolve_bloch(prep, p).norm() >= 1 - 1e-12:
            continue
        assert sld_residuals(prep, p, sld_coefficients(prep, p)) < 1e-12


def test_sld_rejects_pure_states():
    with pytest.raises(SingularityError):
        sld_coefficients(EXCITED, GadParams(2.0, 1.0, 0.0))
    # pure state at tau = 0 has no T dependence and so carries no information
    assert qfi_from_sld(COHERENT, GadParams(2.0, 1.0, 0.0)) == 0.0
    assert qfi_closed_form(COHERENT, GadParams(2.0, 1.0, 0.0)) == 0.0


def test_qfi_terms_split():
    p = GadParams(2.0, 1.0, 1.0)
    t = qfi_terms(GROUND, p)
    assert t.coherence == 0.0
    assert t.total == pytest.approx(qfi_closed_form(GROUND, p), rel=1e-15)
    t = qfi_terms(COHERENT, p)
    assert t.coherence > 0.0 and t.population > 0.0
    assert t.total == pytest.approx(Q_COHERENT, rel=1e-13)


def test_coherence_term_vanishes_at_long_times():
    t = qfi_terms(COHERENT, GadParams(2.0, 1.0, 40.0))
    assert t.coherence < 1e-15 * t.population


def test_qfi_independent_of_azimuth():
    p = GadParams(2.0, 1.0, 0.8)
    for theta in [0.3, math.pi / 2, 2.5]:
        a = qfi_closed_form(BlochState.from_angles(theta, 0.0), p)
        b = qfi_closed_form(BlochState.from_angles(theta, math.pi / 3), p)
        assert b == pytest.approx(a, rel=1e-13)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, math.pi), st.floats(0, 2 * math.pi), st.floats(0, 1), st.floats(0.2, 10), st.floats(0.01, 10))
def test_bound_inequality(theta, phi, r, T, gt):
    prep = BlochState.from_angles(theta, phi, r)
    p = GadParams(T, 1.0, gt)
    ratio = bound_ratio(prep, p)
    if not np.isnan(ratio):
        assert ratio >= 1 - 1e-9
    q = qfi_closed_form(prep, p)
    assert q >= classical_fisher_energy(prep, p) * (1 - 1e-9) - 1e-300


@pytest.mark.parametrize("gt", np.geomspace(0.01, 10, 25))
def test_diagonal_preparations_saturate(gt):
    for prep in (EXCITED, GROUND):
        p = GadParams(2.0, 1.0, float(gt))
        if heat_capacity(prep, p) == 0:
            continue
        assert abs(bound_ratio(prep, p) - 1) < 1e-9


def test_non_equilibrium_breaks_thermal_linearity():
    p = GadParams(2.0, 1.0, 1.0)
    assert abs(thermal_linearity_ratio(GROUND, p) - 1) > 1e-2
    assert thermal_linearity_ratio(GROUND, GadParams(2.0, 1.0, 60.0)) == pytest.approx(1.0, rel=1e-9)


def test_negative_heat_capacity_out_of_equilibrium():
    # an excited preparation cools faster at higher T at short times
    assert heat_capacity(EXCITED, GadParams(2.0, 1.0, 0.2)) < 0
    assert heat_capacity(GROUND, GadParams(2.0, 1.0, 0.2)) > 0


def test_bounds_scale_with_measurements():
    p = GadParams(2.0, 1.0, 1.0)
    assert qcrb(COHERENT, p, 100) == pytest.approx(qcrb(COHERENT, p) / 10, rel=1e-14)
    assert crb_energy(COHERENT, p, 10_000) == pytest.approx(crb_energy(COHERENT, p) / 100, rel=1e-14)
    assert crb_energy(COHERENT, p) > qcrb(COHERENT, p)
    with pytest.raises(DomainError):
        qcrb(COHERENT, p, 0)


def test_zero_information_is_infinite_bound():
    p = GadParams(2.0, 1.0, 0.0)
    assert math.isinf(qcrb(GROUND, p))
    assert math.isinf(crb_energy(GROUND, p))
    assert is_divergent(qcrb(GROUND, p))
    assert math.isnan(bound_ratio(GROUND, p))
    assert not is_divergent(qcrb(GROUND, GadParams(2.0, 1.0, 1.0)))


def test_vectorized_over_time():
    gts = np.geomspace(0.01, 10, 9)
    q = qfi_closed_form(COHERENT, GadParams(2.0, 1.0, gts))
    for k, gt in enumerate(gts):
        assert q[k] == pytest.approx(qfi_closed_form(COHERENT, GadParams(2.0, 1.0, float(gt))), rel=1e-15)


def test_fidelity_basics():
    rho = bloch_to_density(BlochState(0.3, 0.1, -0.2))
    assert root_fidelity(rho, rho) == pytest.approx(1.0, abs=1e-14)
    a = bloch_to_density(EXCITED)
    b = bloch_to_density(GROUND)
    assert root_fidelity(a, b) == pytest.approx(0.0, abs=1e-14)


def test_metrology_report():
    rep = metrology_report(GROUND, GadParams(2.0, 1.0, 1.0), M=100)
    assert rep.saturated
    assert rep.qcrb == pytest.approx(rep.crb, rel=1e-9)
    rep = metrology_report(COHERENT, GadParams(2.0, 1.0, 1.0))
    assert not rep.saturated
    assert rep.bound_ratio == pytest.approx(RATIO_COHERENT, rel=1e-12)
