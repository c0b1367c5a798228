"""Monte Carlo simulation of repeated energy measurements and the count-rate estimators.

Outcomes are drawn with numpy's PCG64 bit generator seeded by a 64-bit
integer; binomial variates use numpy's ``Generator.binomial``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize.elementwise import find_root

from .metrology import heat_capacity
from .model import BlochState, DomainError, GadParams, _scalar, evolve_bloch

DEFAULT_BRACKET = (0.05, 50.0)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class ShotRecord:
    """Counts of excited (n0) and ground (n1) outcomes; arrays for batches of rounds."""

    n0: int
    n1: int
    seed: int | None = None

    def __post_init__(self):
        n0, n1 = np.asarray(self.n0), np.asarray(self.n1)
        if np.any(n0 < 0) or np.any(n1 < 0) or np.any(n0 + n1 < 1):
            raise DomainError("counts must be non-negative with at least one shot")

    @property
    def shots(self):
        return _scalar(np.asarray(self.n0) + np.asarray(self.n1))


def sample_shots(r: BlochState, M: int, seed: int, repetitions: int | None = None) -> ShotRecord:
    """Measure sigma_3 M times. With ``repetitions``, n0/n1 are arrays of that length."""
    if M < 1:
        raise DomainError("need at least one shot")
    p_excited = float(np.clip(0.5 * (1.0 + r.r3), 0.0, 1.0))
    n0 = make_rng(seed).binomial(M, p_excited, size=repetitions)
    return ShotRecord(_scalar(n0), _scalar(M - n0), seed)


@dataclass(frozen=True)
class EstimateRecord:
    energy_mean: float
    energy_var: float
    temp_uncertainty: float
    temp_estimate: float | None


def energy_estimate(s: ShotRecord):
    """<E> = (n0 - n1)/(2(n0 + n1)) and its variance n0 n1/(n0 + n1)^3."""
    n0 = np.asarray(s.n0, dtype=float)
    n1 = np.asarray(s.n1, dtype=float)
    total = n0 + n1
    return _scalar((n0 - n1) / (2.0 * total)), _scalar(n0 * n1 / total**3)


def temperature_uncertainty(s: ShotRecord, prep: BlochState, p: GadParams):
    """Delta T = sqrt(Var E)/|C_T|, with C_T from the model at the true parameters.

    Returns +inf where the heat capacity vanishes. All-excited or all-ground
    counts give Delta T = 0, which only says the sample showed no spread.
    """
    _, var = energy_estimate(s)
    c = abs(float(heat_capacity(prep, p)))
    if c == 0.0:
        return _scalar(np.full(np.shape(var), np.inf))
    return _scalar(np.sqrt(var) / c)


def _energy(T, prep, gamma_tau):
    return 0.5 * np.asarray(evolve_bloch(prep, GadParams(T, 1.0, gamma_tau)).r3)


def monotonic_on(prep: BlochState, gamma_tau: float, bracket=DEFAULT_BRACKET, samples: int = 512) -> bool:
    """True when E_T(tau) is strictly monotonic in T across the bracket."""
    T = np.geomspace(*bracket, samples)
    c = np.asarray(heat_capacity(prep, GadParams(T, 1.0, gamma_tau)))
    return bool(np.all(c > 0.0) or np.all(c < 0.0))


def invert_temperatures(e_obs, prep: BlochState, gamma_tau: float, bracket=DEFAULT_BRACKET,
                        xtol: float = 1e-12) -> np.ndarray:
    """Vectorized inversion of E_T(tau) = e_obs over T in ``bracket``; NaN marks failures.

    Every entry fails when E_T(tau) is not monotonic on the bracket (e.g. an
    excited preparation near its QFI zero); single entries fail when they lie
    outside the energies reachable in the bracket.
    """
    e_obs = np.atleast_1d(np.asarray(e_obs, dtype=float))
    out = np.full(e_obs.shape, np.nan)
    if not monotonic_on(prep, gamma_tau, bracket):
        return out
    lo, hi = (float(b) for b in bracket)
    e_lo, e_hi = _energy(lo, prep, gamma_tau), _energy(hi, prep, gamma_tau)
    out[e_obs == e_lo] = lo
    out[e_obs == e_hi] = hi
    inside = (e_obs > min(e_lo, e_hi)) & (e_obs < max(e_lo, e_hi))
    if np.any(inside):
        res = find_root(
            lambda T, e: _energy(T, prep, gamma_tau) - e,
            (np.full(inside.sum(), lo), np.full(inside.sum(), hi)),
            args=(e_obs[inside],),
            tolerances={"xatol": xtol, "xrtol": 4 * np.finfo(float).eps, "fatol": 0.0, "frtol": 0.0},
        )
        out[inside] = np.where(res.success, res.x, np.nan)
    return out


def invert_temperature(e_obs: float, prep: BlochState, gamma_tau: float, bracket=DEFAULT_BRACKET,
                       xtol: float = 1e-12):
    """Solve E_T(tau) = e_obs for T inside ``bracket``; None when that is impossible."""
    t = float(invert_temperatures(e_obs, prep, gamma_tau, bracket, xtol)[0])
    return None if np.isnan(t) else t


def estimate(s: ShotRecord, prep: BlochState, p: GadParams, bracket=DEFAULT_BRACKET) -> EstimateRecord:
    """Full estimation round for a single ShotRecord."""
    e, var = energy_estimate(s)
    return EstimateRecord(
        energy_mean=e,
        energy_var=var,
        temp_uncertainty=temperature_uncertainty(s, prep, p),
        temp_estimate=invert_temperature(e, prep, p.gamma_tau, bracket),
    )


@dataclass(frozen=True)
class ExperimentSummary:
    """Statistics over repeated estimation rounds at one configuration."""

    delta_t_mean: float
    delta_t_std: float
    t_mean: float
    t_std: float
    failures: int


def run_rounds(prep: BlochState, p: GadParams, M: int, repetitions: int, seed: int,
               bracket=DEFAULT_BRACKET, invert: bool = True) -> ExperimentSummary:
    """Repeat the M-shot estimation ``repetitions`` times from one seed."""
    s = sample_shots(evolve_bloch(prep, p), M, seed, repetitions=repetitions)
    dt = np.atleast_1d(temperature_uncertainty(s, prep, p))
    if invert:
        t_all = invert_temperatures(energy_estimate(s)[0], prep, p.gamma_tau, bracket)
        failures = int(np.sum(np.isnan(t_all)))
        t_hat = t_all[~np.isnan(t_all)]
    else:
        failures, t_hat = 0, np.empty(0)
    return ExperimentSummary(
        delta_t_mean=float(np.mean(dt)),
        delta_t_std=float(np.std(dt, ddof=1)) if dt.size > 1 else 0.0,
        t_mean=float(np.mean(t_hat)) if t_hat.size else float("nan"),
        t_std=float(np.std(t_hat, ddof=1)) if t_hat.size > 1 else float("nan"),
        failures=failures,
    )
