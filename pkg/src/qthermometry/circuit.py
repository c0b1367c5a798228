"""System + ancilla gate simulation of the AD and IAD channels.

Both qubits use the channel basis ordering (index 0 = excited / |0>, index 1 =
ground / |1>). The two-qubit space is ordered system (x) ancilla.

Conventions, fixed so that the circuit reproduces the Kraus branches exactly:

* the ancilla starts in |0>;
* R(phi) = exp(-i phi sigma_y) = [[cos phi, -sin phi], [sin phi, cos phi]]
  (full-angle form), so R(phi) CZ R(phi) leaves the ancilla in
  cos(2 phi)|0> + sin(2 phi)|1> when the system is excited and in |0> when
  it is in the ground state. This is why cos^2(2 phi) is the damping factor;
* CZ puts a -1 phase on |1>_S |1>_A, i.e. the system acts as control on its
  ground level;
* outcome 0 on the ancilla is the no-jump branch; outcome 1 flags a decay
  and triggers sigma_x on the system.

The IAD circuit is the AD circuit conjugated by sigma_x on the system. The
extra sigma_z used on the optical bench only fixes a hardware phase and is
not applied here: on the reduced system state it would flip the sign of the
coherences and no longer reproduce the absorption Kraus branch.
"""
from __future__ import annotations

import numpy as np

from .channel import IDENTITY, SIGMA_X, branch_weights, check_density, damping_factor
from .model import DomainError, GadParams

CZ = np.diag([1, 1, 1, -1]).astype(complex)
PROJECTORS = (np.diag([1, 0]).astype(complex), np.diag([0, 1]).astype(complex))
ANCILLA_REF = np.diag([1, 0]).astype(complex)


def ry(phi: float) -> np.ndarray:
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, -s], [s, c]], dtype=complex)


def damping_angle(p: GadParams) -> float:
    """phi in [0, pi/4] with cos^2(2 phi) = exp(-gamma (2N+1) tau)."""
    # clip guards sqrt(eta) = 1 + ulp at tau = 0
    return 0.5 * float(np.arccos(np.clip(np.sqrt(damping_factor(p)), 0.0, 1.0)))


def _check_angle(phi):
    if not 0.0 <= phi <= np.pi / 4 + 1e-15:
        raise DomainError(f"damping angle must lie in [0, pi/4], got {phi!r}")


def partial_trace_ancilla(rho_sa: np.ndarray) -> np.ndarray:
    return np.einsum("iaja->ij", rho_sa.reshape(2, 2, 2, 2))


def ad_circuit_unitary(phi: float) -> np.ndarray:
    r = np.kron(IDENTITY, ry(phi))
    return r @ CZ @ r


def simulate_ad_circuit(rho_s, phi: float) -> np.ndarray:
    """Run the AD dilation and average over both ancilla outcomes."""
    rho_s = check_density(rho_s)
    _check_angle(phi)
    u = ad_circuit_unitary(phi)
    rho_sa = u @ np.kron(rho_s, ANCILLA_REF) @ u.conj().T
    out = np.zeros((2, 2), dtype=complex)
    for outcome, proj in enumerate(PROJECTORS):
        m = np.kron(IDENTITY, proj)
        branch = m @ rho_sa @ m
        if outcome == 1:
            fix = np.kron(SIGMA_X, IDENTITY)
            branch = fix @ branch @ fix
        out += partial_trace_ancilla(branch)
    return out


def simulate_iad_circuit(rho_s, phi: float) -> np.ndarray:
    rho_s = check_density(rho_s)
    flipped = simulate_ad_circuit(SIGMA_X @ rho_s @ SIGMA_X, phi)
    return SIGMA_X @ flipped @ SIGMA_X


def simulate_gad_circuit(rho_s, p: GadParams, weights=None) -> np.ndarray:
    """Weighted mixture of the AD and IAD circuit outputs."""
    phi = damping_angle(p)
    w_ad, w_iad = branch_weights(p) if weights is None else weights
    return w_ad * simulate_ad_circuit(rho_s, phi) + w_iad * simulate_iad_circuit(rho_s, phi)
