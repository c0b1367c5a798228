import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qthermometry.channel import (
    SIGMA_X,
    KrausSet,
    apply_channel,
    bloch_to_density,
    branch_weights,
    check_density,
    cptp_check,
    damping_factor,
    density_to_bloch,
    gad_kraus_set,
    identity_kraus_set,
)
from qthermometry.model import BlochState, DomainError, GadParams, equilibrium_bloch, evolve_bloch
from qthermometry.verification import random_preparation, unnormalized_weights


@st.composite
def cases(draw):
    v = np.array([draw(st.floats(-1, 1)) for _ in range(3)])
    n = np.linalg.norm(v)
    if n > 1:
        v /= n
    return BlochState(*v), GadParams(draw(st.floats(0.2, 10)), 1.0, draw(st.floats(0, 10)))


def test_bloch_density_examples():
    np.testing.assert_allclose(bloch_to_density(BlochState(0, 0, 0)), np.eye(2) / 2, atol=0)
    np.testing.assert_allclose(bloch_to_density(BlochState(0, 0, 1)), [[1, 0], [0, 0]], atol=0)
    np.testing.assert_allclose(bloch_to_density(BlochState(0, 0, -1)), [[0, 0], [0, 1]], atol=0)


@settings(max_examples=200, deadline=None)
@given(cases())
def test_bloch_density_round_trip(case):
    r, _ = case
    rho = check_density(bloch_to_density(r))
    np.testing.assert_allclose(density_to_bloch(rho).as_array(), r.as_array(), atol=1e-12)


def test_density_to_bloch_rejects_invalid():
    with pytest.raises(DomainError):
        density_to_bloch(np.array([[0.5, 1.0], [0.0, 0.5]]))
    with pytest.raises(DomainError):
        density_to_bloch(np.eye(2))
    with pytest.raises(DomainError):
        density_to_bloch(np.array([[1.5, 0], [0, -0.5]]))


def test_kraus_identity_at_zero_time():
    rng = np.random.default_rng(0)
    ks = gad_kraus_set(GadParams(2.0, 1.0, 0.0))
    for _ in range(10):
        rho = bloch_to_density(random_preparation(rng))
        np.testing.assert_allclose(apply_channel(ks, rho), rho, atol=1e-15)


def test_zero_temperature_is_pure_amplitude_damping():
    ks = gad_kraus_set(GadParams(1e-3, 1.0, 0.7))
    rep = cptp_check(ks)
    assert rep.weights["IAD"] == 0.0
    assert rep.weights["AD"] == pytest.approx(1.0, abs=1e-15)
    out = apply_channel(ks, bloch_to_density(BlochState(0, 0, 1)))
    eta = np.exp(-0.7)
    np.testing.assert_allclose(out, np.diag([eta, 1 - eta]), atol=1e-15)


@settings(max_examples=200, deadline=None)
@given(cases())
def test_completeness(case):
    _, p = case
    ks = gad_kraus_set(p)
    assert len(ks) == 4
    total = sum(k.conj().T @ k for k in ks.operators)
    assert np.max(np.abs(total - np.eye(2))) < 1e-12
    assert cptp_check(ks).residual < 1e-12


def test_cptp_report():
    p = GadParams(1 / np.log(2), 1.0, 0.5)  # N = 1
    rep = cptp_check(gad_kraus_set(p))
    assert rep.complete
    assert rep.weights["AD"] == pytest.approx(2 / 3, abs=1e-14)
    assert rep.weights["IAD"] == pytest.approx(1 / 3, abs=1e-14)

    ks = gad_kraus_set(GadParams(2.0, 1.0, 0.5))
    dropped = KrausSet(ks.operators[:3], ks.labels[:3])
    assert cptp_check(dropped).residual > 1e-3
    with pytest.raises(DomainError):
        apply_channel(dropped, np.eye(2) / 2)


def test_unnormalized_weights_break_completeness_except_at_n_equal_one():
    # sum K^dag K = (N + 2)/(2N + 1) * 1 with the absorption branch at 1/(2N+1)
    for T in [0.5, 2.0, 6.0]:
        p = GadParams(T, 1.0, 1.0)
        N = p.occupation
        rep = cptp_check(gad_kraus_set(p, unnormalized_weights(p)))
        assert rep.residual == pytest.approx(abs(1 - N) / (2 * N + 1), rel=1e-12)
    p = GadParams(1 / np.log(2), 1.0, 1.0)
    assert cptp_check(gad_kraus_set(p, unnormalized_weights(p))).residual < 1e-12


@pytest.mark.parametrize("T", [0.2, 1.0, 2.0, 10.0])
@pytest.mark.parametrize("gt", [0.0, 0.3, 5.0])
def test_equilibrium_state_is_fixed(T, gt):
    rho = bloch_to_density(equilibrium_bloch(T))
    np.testing.assert_allclose(apply_channel(gad_kraus_set(GadParams(T, 1.0, gt)), rho), rho, atol=1e-15)


@settings(max_examples=300, deadline=None)
@given(cases())
def test_kraus_matches_bloch_evolution(case):
    r, p = case
    out = apply_channel(gad_kraus_set(p), bloch_to_density(r))
    assert np.linalg.eigvalsh(out)[0] >= -1e-12
    assert abs(np.trace(out) - 1) < 1e-12
    np.testing.assert_allclose(density_to_bloch(out).as_array(), evolve_bloch(r, p).as_array(), atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(cases(), st.floats(0, 5))
def test_channel_composition(case, t2):
    r, p = case
    p2 = GadParams(p.temperature, 1.0, t2)
    both = GadParams(p.temperature, 1.0, p.tau + t2)
    rho = bloch_to_density(r)
    seq = apply_channel(gad_kraus_set(p2), apply_channel(gad_kraus_set(p), rho))
    np.testing.assert_allclose(seq, apply_channel(gad_kraus_set(both), rho), atol=1e-12)


def test_iad_is_bit_flip_conjugate_of_ad():
    p = GadParams(2.0, 1.0, 0.8)
    ks = gad_kraus_set(p)
    w_ad, w_iad = branch_weights(p)
    ad, iad = ks.branch("AD").operators, ks.branch("IAD").operators
    for a, b in zip(ad, iad):
        np.testing.assert_allclose(b / np.sqrt(w_iad), SIGMA_X @ (a / np.sqrt(w_ad)) @ SIGMA_X, atol=1e-15)


def test_decay_branch_lowers_energy():
    # the jump operator of the AD branch must send excited -> ground
    p = GadParams(2.0, 1.0, 1.0)
    jump = gad_kraus_set(p).branch("AD").operators[1]
    w_ad, _ = branch_weights(p)
    expected = np.sqrt(w_ad * (1 - damping_factor(p)))
    np.testing.assert_allclose(jump @ np.array([1, 0]), [0, expected], atol=1e-15)


def test_identity_kraus_set():
    rho = bloch_to_density(BlochState(0.2, 0.1, -0.4))
    np.testing.assert_allclose(apply_channel(identity_kraus_set(), rho), rho, atol=0)
