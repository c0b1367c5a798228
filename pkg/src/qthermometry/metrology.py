"""Energy statistics, generalized heat capacity and quantum Fisher information for T.

Three independent QFI routes are provided: the polar closed form, the
recombination of the symmetric logarithmic derivative, and a finite-difference
Bures (fidelity) oracle that only touches density matrices.

Undefined points are signalled in-band so grid scans can run through them:
``bound_ratio`` is NaN where the heat capacity vanishes, and the Cramer-Rao
bounds are +inf where the corresponding information is zero.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .channel import bloch_to_density, check_density
from .model import (
    BlochState,
    DomainError,
    GadParams,
    _check_temperature,
    _scalar,
    equilibrium_bloch,
    evolve_bloch,
    evolve_bloch_dT,
)

# Information below this floor is treated as zero when bounding Delta T.
ZERO_INFORMATION = 1e-12
SATURATION_TOL = 1e-9


class SingularityError(ArithmeticError):
    """A closed form hits a division by zero that has no finite limit."""


def mean_energy(r: BlochState):
    return _scalar(0.5 * np.asarray(r.r3))


def energy_variance(r: BlochState):
    r3 = np.asarray(r.r3)
    return _scalar(np.maximum(0.25 * (1.0 - r3 * r3), 0.0))


def heat_capacity(prep: BlochState, p: GadParams):
    """C_T = dE/dT along the trajectory; may be negative out of equilibrium."""
    return _scalar(0.5 * np.asarray(evolve_bloch_dT(prep, p).dr3))


class QfiTerms(NamedTuple):
    population: float
    coherence: float

    @property
    def total(self):
        return _scalar(np.asarray(self.population) + np.asarray(self.coherence))


def qfi_terms(prep: BlochState, p: GadParams) -> QfiTerms:
    """Split Q_T into the population term (dr)^2/(1-r^2) and the coherence term r^2 (dtheta)^2."""
    r = evolve_bloch(prep, p)
    d = evolve_bloch_dT(prep, p)
    x = r.as_array()
    dx = d.as_array()
    r2 = np.sum(x * x, axis=0)
    rdr = np.sum(x * dx, axis=0)
    grad2 = np.sum(dx * dx, axis=0)
    one_minus = 1.0 - r2
    if np.any((one_minus <= 0.0) & (rdr != 0.0)):
        raise SingularityError("pure evolved state with a non-zero radial derivative")

    at_origin = r2 == 0.0
    safe_r2 = np.where(at_origin, 1.0, r2)
    dlen2 = np.where(at_origin, grad2, rdr * rdr / safe_r2)
    safe_om = np.where(one_minus > 0.0, one_minus, 1.0)
    population = np.where(one_minus > 0.0, dlen2 / safe_om, 0.0)

    # r^2 (dtheta)^2 is the transverse part of the gradient: |dr|^2 - (dr_radial)^2.
    # The polar form is used off the axis; on the axis it is zero.
    perp = np.hypot(x[0], x[1])
    on_axis = perp == 0.0
    safe_perp = np.where(on_axis, 1.0, perp)
    dperp = np.where(on_axis, 0.0, (x[0] * dx[0] + x[1] * dx[1]) / safe_perp)
    dtheta = (x[2] * dperp - perp * dx[2]) / safe_r2
    coherence = np.where(at_origin, 0.0, r2 * dtheta * dtheta)
    return QfiTerms(_scalar(population), _scalar(coherence))


def qfi_closed_form(prep: BlochState, p: GadParams):
    return qfi_terms(prep, p).total


@dataclass(frozen=True)
class SldCoefficients:
    """Pauli expansion L_T = l0 * 1 + (l1, l2, l3) . sigma."""

    l0: float
    l1: float
    l2: float
    l3: float

    def vector(self) -> np.ndarray:
        return np.array(np.broadcast_arrays(self.l1, self.l2, self.l3), dtype=float)


def _sld(prep, p):
    """SLD coefficients with pure, T-independent points (zero derivative) set to zero."""
    x = evolve_bloch(prep, p).as_array()
    dx = evolve_bloch_dT(prep, p).as_array()
    one_minus = 1.0 - np.sum(x * x, axis=0)
    pure = one_minus <= 0.0
    frozen = np.all(dx == 0.0, axis=0)
    if np.any(pure & ~frozen):
        raise SingularityError("the SLD is singular on a pure state that depends on T")
    l0 = -np.sum(x * dx, axis=0) / np.where(pure, 1.0, one_minus)
    lvec = dx - x * l0
    return l0, lvec, dx, pure


def sld_coefficients(prep: BlochState, p: GadParams) -> SldCoefficients:
    l0, lvec, _, pure = _sld(prep, p)
    if np.any(pure):
        raise SingularityError("the SLD is not unique on pure states")
    return SldCoefficients(_scalar(l0), *(_scalar(v) for v in lvec))


def sld_residuals(prep: BlochState, p: GadParams, sld: SldCoefficients):
    """Residuals of l_j + r_j l0 = dr_j/dT and l0 + r.l = 0 (max abs over both)."""
    x = evolve_bloch(prep, p).as_array()
    dx = evolve_bloch_dT(prep, p).as_array()
    lvec = sld.vector()
    l0 = np.asarray(sld.l0)
    first = np.max(np.abs(lvec + x * l0 - dx))
    second = np.max(np.abs(l0 + np.sum(x * lvec, axis=0)))
    return float(max(first, second))


def qfi_from_sld(prep: BlochState, p: GadParams):
    """Q_T = Tr[drho/dT L_T] = sum_j l_j dr_j/dT."""
    _, lvec, dx, _ = _sld(prep, p)
    return _scalar(np.sum(lvec * dx, axis=0))


def _psd_sqrt(a: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def root_fidelity(rho, sigma) -> float:
    """sqrt(F) = Tr sqrt(sqrt(rho) sigma sqrt(rho)), via spectral decompositions."""
    rho = check_density(rho, tol=1e-10)
    sigma = check_density(sigma, tol=1e-10)
    s = _psd_sqrt(rho)
    m = s @ sigma @ s
    w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    return float(np.sum(np.sqrt(np.clip(w, 0.0, None))))


def uhlmann_fidelity(rho, sigma) -> float:
    return root_fidelity(rho, sigma) ** 2


def _bures_qfi(prep, p, h):
    T = float(p.temperature)
    hi = bloch_to_density(evolve_bloch(prep, p.with_temperature(T + h)))
    lo = bloch_to_density(evolve_bloch(prep, p.with_temperature(T - h)))
    infidelity = 1.0 - root_fidelity(hi, lo)
    return 8.0 * infidelity / (2.0 * h) ** 2, infidelity


def qfi_numeric_oracle(prep: BlochState, p: GadParams, h=None, min_infidelity=1e-8) -> float:
    """QFI from the Bures distance between rho(T - h) and rho(T + h).

    The step starts at 1e-4*T and is doubled (up to T/20) while 1 - sqrt(F)
    is below ``min_infidelity``, where roundoff in the fidelity would dominate.
    One Richardson step with h/2 then removes the O(h^2) bias.
    Scalar inputs only.
    """
    T = float(p.temperature)
    h = 1e-4 * T if h is None else float(h)
    if not 0.0 < h < T:
        raise DomainError(f"step must lie in (0, T), got {h!r}")
    q, infidelity = _bures_qfi(prep, p, h)
    while infidelity < min_infidelity and 2.0 * h <= 0.05 * T:
        h *= 2.0
        q, infidelity = _bures_qfi(prep, p, h)
    q_half, _ = _bures_qfi(prep, p, 0.5 * h)
    return max((4.0 * q_half - q) / 3.0, 0.0)


def equilibrium_energy_variance(T):
    return energy_variance(equilibrium_bloch(T))


def equilibrium_qfi(T):
    """Gibbs-state QFI, Var(E)/T^4."""
    T = _check_temperature(T)
    return _scalar(np.asarray(equilibrium_energy_variance(T)) / T**4)


def equilibrium_hc(T):
    """Gibbs-state heat capacity, Var(E)/T^2."""
    T = _check_temperature(T)
    return _scalar(np.asarray(equilibrium_energy_variance(T)) / T**2)


def bound_ratio(prep: BlochState, p: GadParams):
    """Q_T Var(E) / C_T^2 (>= 1); NaN where C_T = 0."""
    q = np.asarray(qfi_closed_form(prep, p))
    var = np.asarray(energy_variance(evolve_bloch(prep, p)))
    c = np.asarray(heat_capacity(prep, p))
    c2 = c * c
    undefined = c2 == 0.0
    return _scalar(np.where(undefined, np.nan, q * var / np.where(undefined, 1.0, c2)))


def classical_fisher_energy(prep: BlochState, p: GadParams):
    """C_T^2 / Var(E): Fisher information of the two-outcome energy measurement.

    An energy eigenstate that does not move with T (tau = 0) carries zero
    information; one that does is a genuine singularity.
    """
    var = np.asarray(energy_variance(evolve_bloch(prep, p)))
    c = np.asarray(heat_capacity(prep, p))
    eigen = var == 0.0
    if np.any(eigen & (c != 0.0)):
        raise SingularityError("energy variance vanishes while the energy depends on T")
    return _scalar(np.where(eigen, 0.0, c * c / np.where(eigen, 1.0, var)))


def thermal_linearity_ratio(prep: BlochState, p: GadParams):
    """Q_T T^2 / C_T: equals 1 for Gibbs states and generally not otherwise."""
    c = np.asarray(heat_capacity(prep, p))
    q = np.asarray(qfi_closed_form(prep, p))
    T = np.asarray(p.temperature)
    with np.errstate(divide="ignore", invalid="ignore"):
        return _scalar(q * T * T / c)


def _bound_from_information(info, M):
    if np.any(np.asarray(M) < 1):
        raise DomainError("number of measurements must be at least 1")
    info = np.asarray(info, dtype=float)
    zero = info <= ZERO_INFORMATION
    return _scalar(np.where(zero, np.inf, 1.0 / np.sqrt(M * np.where(zero, 1.0, info))))


def qcrb(prep: BlochState, p: GadParams, M=1):
    """Quantum Cramer-Rao bound on Delta T after M shots; +inf where Q_T vanishes."""
    return _bound_from_information(qfi_closed_form(prep, p), M)


def crb_energy(prep: BlochState, p: GadParams, M=1):
    """Cramer-Rao bound on Delta T for energy measurements; +inf where C_T vanishes."""
    return _bound_from_information(classical_fisher_energy(prep, p), M)


def is_divergent(bound) -> np.ndarray | bool:
    return _scalar(np.isinf(bound))


@dataclass(frozen=True)
class MetrologyReport:
    qfi: float
    heat_capacity: float
    energy_variance: float
    bound_ratio: float
    classical_fisher: float
    qcrb: float
    crb: float

    @property
    def saturated(self):
        return _scalar(np.abs(np.asarray(self.bound_ratio) - 1.0) < SATURATION_TOL)


def metrology_report(prep: BlochState, p: GadParams, M=1) -> MetrologyReport:
    r = evolve_bloch(prep, p)
    return MetrologyReport(
        qfi=qfi_closed_form(prep, p),
        heat_capacity=heat_capacity(prep, p),
        energy_variance=energy_variance(r),
        bound_ratio=bound_ratio(prep, p),
        classical_fisher=classical_fisher_energy(prep, p),
        qcrb=qcrb(prep, p, M),
        crb=crb_energy(prep, p, M),
    )
