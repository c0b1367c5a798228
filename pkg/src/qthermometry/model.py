"""Qubit probe in a bosonic thermal bath: occupation, Bloch trajectory and its T-derivative.

Natural units hbar = omega = k_B = 1. Temperatures are in units of hbar*omega/k_B
and times in units of 1/gamma. The excited state is the +1 eigenstate of sigma_3,
so the thermal fixed point has a negative third Bloch component.

Every function here is elementwise: the fields of ``BlochState`` and ``GadParams``
may be numpy arrays, in which case they broadcast against each other.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BLOCH_TOL = 1e-12


class DomainError(ValueError):
    """Input outside the domain of an operation."""


class DegenerateStateError(DomainError):
    """Operation needs a direction but the Bloch vector is the origin."""


def _check_temperature(T):
    T = np.asarray(T, dtype=float)
    if not np.all(np.isfinite(T)) or np.any(T <= 0):
        raise DomainError(f"temperature must be positive and finite, got {T!r}")
    return T


def _scalar(x):
    x = np.asarray(x)
    return x.item() if x.ndim == 0 else x


@dataclass(frozen=True)
class GadParams:
    """Bath temperature, coupling rate and interaction time."""

    temperature: float
    gamma: float = 1.0
    tau: float = 0.0

    def __post_init__(self):
        _check_temperature(self.temperature)
        gamma = np.asarray(self.gamma, dtype=float)
        tau = np.asarray(self.tau, dtype=float)
        if not np.all(np.isfinite(gamma)) or np.any(gamma <= 0):
            raise DomainError(f"gamma must be positive, got {self.gamma!r}")
        if not np.all(np.isfinite(tau)) or np.any(tau < 0):
            raise DomainError(f"tau must be non-negative, got {self.tau!r}")

    @property
    def gamma_tau(self):
        return _scalar(np.asarray(self.gamma) * np.asarray(self.tau))

    @property
    def occupation(self):
        return planck_occupation(self.temperature)

    def with_temperature(self, T) -> GadParams:
        return GadParams(T, self.gamma, self.tau)


@dataclass(frozen=True)
class BlochState:
    r1: float
    r2: float
    r3: float

    def __post_init__(self):
        v = self.as_array()
        if not np.all(np.isfinite(v)):
            raise DomainError("Bloch components must be finite")
        if np.any(np.sum(v * v, axis=0) > 1.0 + BLOCH_TOL):
            raise DomainError("Bloch vector longer than 1")

    @classmethod
    def from_angles(cls, theta, phi=0.0, r=1.0) -> BlochState:
        return from_polar(PolarBloch(r, theta, phi))

    def as_array(self) -> np.ndarray:
        return np.array(np.broadcast_arrays(self.r1, self.r2, self.r3), dtype=float)

    def norm(self):
        return _scalar(np.sqrt(self.r1 * self.r1 + self.r2 * self.r2 + self.r3 * self.r3))


EXCITED = BlochState(0.0, 0.0, 1.0)
GROUND = BlochState(0.0, 0.0, -1.0)


@dataclass(frozen=True)
class PolarBloch:
    """Bloch vector as (length, polar angle from +3 axis, azimuth)."""

    r: float
    theta: float
    phi: float = 0.0


@dataclass(frozen=True)
class BlochDerivative:
    """Temperature derivative of each Cartesian Bloch component."""

    dr1: float
    dr2: float
    dr3: float

    def as_array(self) -> np.ndarray:
        return np.array(np.broadcast_arrays(self.dr1, self.dr2, self.dr3), dtype=float)


def planck_occupation(T):
    """Mean number of resonant bath quanta, 1/(exp(1/T) - 1)."""
    T = _check_temperature(T)
    with np.errstate(over="ignore"):
        return _scalar(1.0 / np.expm1(1.0 / T))


def occupation_derivative(T):
    """dN/dT, written as N(N+1)/T**2 so that it stays finite as T -> 0."""
    T = _check_temperature(T)
    N = np.asarray(planck_occupation(T))
    return _scalar(N * (N + 1.0) / (T * T))


def _rates(p: GadParams):
    """(2N+1, its T-derivative, gamma*tau)."""
    a = 2.0 * np.asarray(planck_occupation(p.temperature)) + 1.0
    da = 2.0 * np.asarray(occupation_derivative(p.temperature))
    gt = np.asarray(p.gamma, dtype=float) * np.asarray(p.tau, dtype=float)
    return a, da, gt


def evolve_bloch(r0: BlochState, p: GadParams) -> BlochState:
    a, _, gt = _rates(p)
    half = np.exp(-0.5 * a * gt)
    eta = half * half
    # -(1 - eta)/a, with expm1 so short times keep their relative precision
    shift = np.expm1(-a * gt) / a
    return BlochState(
        _scalar(r0.r1 * half),
        _scalar(r0.r2 * half),
        _scalar(r0.r3 * eta + shift),
    )


def evolve_bloch_dT(r0: BlochState, p: GadParams) -> BlochDerivative:
    """Analytic d/dT of ``evolve_bloch`` at fixed preparation, gamma and tau."""
    a, da, gt = _rates(p)
    half = np.exp(-0.5 * a * gt)
    eta = half * half
    dhalf = -0.5 * gt * da * half
    deta = -gt * da * eta
    one_minus_eta = -np.expm1(-a * gt)
    dr3 = deta * (r0.r3 + 1.0 / a) + one_minus_eta * da / (a * a)
    return BlochDerivative(_scalar(r0.r1 * dhalf), _scalar(r0.r2 * dhalf), _scalar(dr3))


def equilibrium_bloch(T) -> BlochState:
    T = _check_temperature(T)
    # -1/(2N+1) == -tanh(1/(2T)); tanh is exact in both limits
    return BlochState(0.0, 0.0, _scalar(-np.tanh(0.5 / T)))


def to_polar(r: BlochState) -> PolarBloch:
    """Cartesian -> polar. The origin maps to (0, 0, 0) by convention."""
    length = np.sqrt(r.r1 * r.r1 + r.r2 * r.r2 + r.r3 * r.r3)
    theta = np.arctan2(np.hypot(r.r1, r.r2), r.r3)
    phi = np.arctan2(r.r2, r.r1)
    return PolarBloch(_scalar(length), _scalar(theta), _scalar(phi))


def from_polar(p: PolarBloch) -> BlochState:
    s = np.sin(p.theta)
    return BlochState(
        _scalar(p.r * np.cos(p.phi) * s),
        _scalar(p.r * np.sin(p.phi) * s),
        _scalar(p.r * np.cos(p.theta)),
    )


def polar_derivatives(r: BlochState, d: BlochDerivative):
    """Return (d|r|/dT, dtheta/dT) from Cartesian components and their derivatives.

    On the poles (r1 = r2 = 0) the polar angle is taken to be stationary, which
    is the limit along any trajectory of this channel: the transverse
    components only ever rescale, so they stay zero.
    """
    length = np.sqrt(r.r1 * r.r1 + r.r2 * r.r2 + r.r3 * r.r3)
    if np.any(length == 0.0):
        raise DegenerateStateError("polar derivatives are undefined at the origin")
    perp = np.hypot(r.r1, r.r2)
    on_axis = perp == 0.0
    safe_perp = np.where(on_axis, 1.0, perp)
    dperp = np.where(on_axis, 0.0, (r.r1 * d.dr1 + r.r2 * d.dr2) / safe_perp)
    dlength = (r.r1 * d.dr1 + r.r2 * d.dr2 + r.r3 * d.dr3) / length
    dtheta = (r.r3 * dperp - perp * d.dr3) / (length * length)
    return _scalar(dlength), _scalar(dtheta)
