"""Cross-pathway oracle suites: Kraus vs Bloch, circuit vs Kraus, QFI routes, derivatives, CPTP."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import metrology as met
from .channel import (
    apply_channel,
    bloch_to_density,
    branch_weights,
    cptp_check,
    gad_kraus_set,
)
from .circuit import simulate_gad_circuit
from .model import BlochState, GadParams, evolve_bloch, evolve_bloch_dT, planck_occupation
from .shots import make_rng

EXACT_TOL = 1e-12
ANALYTIC_QFI_TOL = 1e-9
ORACLE_QFI_TOL = 1e-5
DERIVATIVE_TOL = 1e-7


@dataclass(frozen=True)
class SuiteResult:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual <= self.tolerance)


def unnormalized_weights(p: GadParams):
    """Branch weights with the absorption branch at 1/(2N+1) instead of N/(2N+1)."""
    a = 2.0 * planck_occupation(p.temperature) + 1.0
    return (planck_occupation(p.temperature) + 1.0) / a, 1.0 / a


WEIGHT_SCHEMES = {"thermal": branch_weights, "unnormalized": unnormalized_weights}


def random_preparation(rng) -> BlochState:
    v = rng.normal(size=3)
    v *= rng.uniform() ** (1 / 3) / np.linalg.norm(v)
    return BlochState(*v)


def random_cases(n: int, seed: int, pure: bool = False):
    """(preparation, params) pairs with T in [0.2, 10] and gamma*tau in [0.05, 10]."""
    rng = make_rng(seed)
    for _ in range(n):
        if pure:
            prep = BlochState.from_angles(rng.uniform(0, np.pi), rng.uniform(-np.pi, np.pi))
        else:
            prep = random_preparation(rng)
        yield prep, GadParams(rng.uniform(0.2, 10.0), 1.0, rng.uniform(0.05, 10.0))


def relative_error(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    scale = np.max(np.abs(b))
    if scale == 0.0:
        return float(np.max(np.abs(a)))
    return float(np.max(np.abs(a - b)) / scale)


def finite_difference_dT(prep: BlochState, p: GadParams, h=None) -> np.ndarray:
    """Central difference of evolve_bloch over T, step 1e-5*T by default."""
    T = float(p.temperature)
    h = 1e-5 * T if h is None else h
    hi = evolve_bloch(prep, p.with_temperature(T + h)).as_array()
    lo = evolve_bloch(prep, p.with_temperature(T - h)).as_array()
    return (hi - lo) / (2.0 * h)


def derivative_grid():
    """T in [0.2, 10] x gamma*tau in [0, 10] x the three reference preparations."""
    preps = [BlochState(0, 0, 1), BlochState(0, 0, -1), BlochState(1, 0, 0)]
    for T in np.linspace(0.2, 10.0, 9):
        for gt in np.linspace(0.0, 10.0, 11):
            for prep in preps:
                yield prep, GadParams(float(T), 1.0, float(gt))


def suite_cptp(weights, n=100, seed=1) -> SuiteResult:
    worst = 0.0
    for _, p in random_cases(n, seed):
        worst = max(worst, cptp_check(gad_kraus_set(p, weights(p))).residual)
    return SuiteResult("cptp", worst, EXACT_TOL)


def suite_kraus_vs_bloch(weights, n=100, seed=2) -> SuiteResult:
    worst = 0.0
    for prep, p in random_cases(n, seed):
        kraus = apply_channel(gad_kraus_set(p, weights(p)), bloch_to_density(prep), check=False)
        worst = max(worst, float(np.max(np.abs(kraus - bloch_to_density(evolve_bloch(prep, p))))))
    return SuiteResult("kraus_vs_bloch", worst, EXACT_TOL)


def suite_circuit_vs_kraus(weights, n=100, seed=3) -> SuiteResult:
    worst = 0.0
    for prep, p in random_cases(n, seed):
        w = weights(p)
        rho = bloch_to_density(prep)
        kraus = apply_channel(gad_kraus_set(p, w), rho, check=False)
        circ = simulate_gad_circuit(rho, p, w)
        worst = max(worst, float(np.max(np.abs(kraus - circ))))
    return SuiteResult("circuit_vs_kraus", worst, EXACT_TOL)


def suite_qfi_routes(n=200, seed=4):
    analytic = oracle = 0.0
    for prep, p in random_cases(n, seed, pure=True):
        q = met.qfi_closed_form(prep, p)
        analytic = max(analytic, relative_error(met.qfi_from_sld(prep, p), q))
        oracle = max(oracle, relative_error(met.qfi_numeric_oracle(prep, p), q))
    return [
        SuiteResult("qfi_closed_vs_sld", analytic, ANALYTIC_QFI_TOL),
        SuiteResult("qfi_closed_vs_fidelity", oracle, ORACLE_QFI_TOL),
    ]


def suite_derivatives():
    traj = hc = 0.0
    for prep, p in derivative_grid():
        fd = finite_difference_dT(prep, p)
        traj = max(traj, relative_error(evolve_bloch_dT(prep, p).as_array(), fd))
        hc = max(hc, relative_error(met.heat_capacity(prep, p), 0.5 * fd[2]))
    return [
        SuiteResult("trajectory_dT", traj, DERIVATIVE_TOL),
        SuiteResult("heat_capacity_dT", hc, DERIVATIVE_TOL),
    ]


def run_verification(weights="thermal"):
    """Run every suite; ``weights`` names the branch-weight scheme fed to the Kraus/circuit suites."""
    w = WEIGHT_SCHEMES[weights] if isinstance(weights, str) else weights
    results = [suite_cptp(w), suite_kraus_vs_bloch(w), suite_circuit_vs_kraus(w)]
    results += suite_qfi_routes()
    results += suite_derivatives()
    return results
