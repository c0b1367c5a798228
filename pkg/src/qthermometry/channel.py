"""Density matrices and the Kraus form of the generalized amplitude damping channel.

Basis ordering: index 0 is the excited state, index 1 the ground state, so
sigma_3 = diag(1, -1) and rho = (1 + r.sigma)/2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import BlochState, DomainError, GadParams, planck_occupation

TOL = 1e-12

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

EXCITED_KET = np.array([1, 0], dtype=complex)
GROUND_KET = np.array([0, 1], dtype=complex)


def check_density(rho, tol: float = TOL) -> np.ndarray:
    """Validate a density matrix (any dimension) and return it as a complex array."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DomainError(f"density matrix must be square, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise DomainError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise DomainError(f"density matrix trace is {np.trace(rho).real!r}, not 1")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0] < -tol:
        raise DomainError("density matrix has a negative eigenvalue")
    return rho


def bloch_to_density(r: BlochState) -> np.ndarray:
    return 0.5 * (IDENTITY + r.r1 * SIGMA_X + r.r2 * SIGMA_Y + r.r3 * SIGMA_Z)


def density_to_bloch(rho) -> BlochState:
    rho = check_density(rho)
    return BlochState(
        2.0 * rho[0, 1].real,
        -2.0 * rho[0, 1].imag,
        (rho[0, 0] - rho[1, 1]).real,
    )


@dataclass(frozen=True)
class KrausSet:
    operators: tuple
    labels: tuple

    def __post_init__(self):
        if len(self.operators) != len(self.labels):
            raise ValueError("one label per Kraus operator")

    def branch(self, label: str) -> KrausSet:
        keep = [(k, lab) for k, lab in zip(self.operators, self.labels) if lab == label]
        return KrausSet(tuple(k for k, _ in keep), tuple(lab for _, lab in keep))

    def __len__(self):
        return len(self.operators)


def damping_factor(p: GadParams) -> float:
    """exp(-gamma (2N+1) tau): surviving excited (AD) or ground (IAD) population."""
    a = 2.0 * planck_occupation(p.temperature) + 1.0
    return float(np.exp(-a * p.gamma_tau))


def branch_weights(p: GadParams):
    """Probabilities (N+1)/(2N+1) and N/(2N+1) of the decay and absorption branches."""
    N = planck_occupation(p.temperature)
    a = 2.0 * N + 1.0
    return (N + 1.0) / a, N / a


def ad_kraus(eta: float):
    """Amplitude damping toward the ground state with survival probability eta."""
    k0 = np.array([[np.sqrt(eta), 0], [0, 1]], dtype=complex)
    k1 = np.array([[0, 0], [np.sqrt(1.0 - eta), 0]], dtype=complex)
    return k0, k1


def iad_kraus(eta: float):
    """Inverse amplitude damping (pumping toward the excited state): X . AD . X."""
    return tuple(SIGMA_X @ k @ SIGMA_X for k in ad_kraus(eta))


def gad_kraus_set(p: GadParams, weights=None) -> KrausSet:
    """The four GAD Kraus operators, two per branch.

    ``weights`` overrides the (decay, absorption) branch probabilities; it
    exists so verification can feed deliberately broken normalizations.
    """
    eta = damping_factor(p)
    w_ad, w_iad = branch_weights(p) if weights is None else weights
    ops = [np.sqrt(w_ad) * k for k in ad_kraus(eta)]
    ops += [np.sqrt(w_iad) * k for k in iad_kraus(eta)]
    return KrausSet(tuple(ops), ("AD", "AD", "IAD", "IAD"))


def identity_kraus_set() -> KrausSet:
    return KrausSet((IDENTITY.copy(),), ("ID",))


@dataclass(frozen=True)
class CptpReport:
    residual: float
    weights: dict

    @property
    def complete(self) -> bool:
        return self.residual < TOL


def cptp_check(ks: KrausSet) -> CptpReport:
    """Operator-norm distance of sum K^dag K from the identity, plus per-branch weights."""
    dim = ks.operators[0].shape[1] if len(ks) else 2
    total = np.zeros((dim, dim), dtype=complex)
    weights = {}
    for k, label in zip(ks.operators, ks.labels):
        kk = k.conj().T @ k
        total += kk
        weights[label] = weights.get(label, 0.0) + np.trace(kk).real / dim
    residual = float(np.linalg.norm(total - np.eye(dim), 2))
    return CptpReport(residual, weights)


def apply_channel(ks: KrausSet, rho, check: bool = True) -> np.ndarray:
    """sum_i K_i rho K_i^dag. With ``check`` the set must be complete and rho valid."""
    if check:
        report = cptp_check(ks)
        if not report.complete:
            raise DomainError(f"Kraus set is not trace preserving (residual {report.residual:.3e})")
        rho = check_density(rho)
    else:
        rho = np.asarray(rho, dtype=complex)
    out = np.zeros_like(rho)
    for k in ks.operators:
        out += k @ rho @ k.conj().T
    return out
