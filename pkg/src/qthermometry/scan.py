"""QFI landscapes over (theta0, gamma*tau), their optima, and the excited-state QFI zero.

Grids are evaluated in one vectorized pass, so results do not depend on any
evaluation order. Argmax ties go to the smallest gamma*tau, then the smallest
theta0. The azimuth of the preparation does not enter the QFI and is kept at
``phi0`` (0 by default).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect, minimize, minimize_scalar

from . import metrology as met
from .model import EXCITED, BlochState, DomainError, GadParams, evolve_bloch, evolve_bloch_dT
from .shots import make_rng, run_rounds

FIG1_PANELS = (("excited", 0.0), ("quarter", np.pi / 4), ("coherent", np.pi / 2), ("ground", np.pi))
FIG3_PANELS = (("ground", np.pi), ("coherent", np.pi / 2), ("excited", 0.0))
SLICE_GAMMA_TAU = 0.6


def default_theta0(steps: int = 181) -> np.ndarray:
    return np.linspace(0.0, np.pi, steps)


def default_gamma_tau(steps: int = 400, lo: float = 0.01, hi: float = 10.0) -> np.ndarray:
    return np.geomspace(lo, hi, steps)


@dataclass(frozen=True)
class ScanGrid:
    theta0: np.ndarray = field(default_factory=default_theta0)
    gamma_tau: np.ndarray = field(default_factory=default_gamma_tau)
    temperature: float = 2.0
    phi0: float = 0.0

    def __post_init__(self):
        for name in ("theta0", "gamma_tau"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.ndim != 1 or v.size == 0 or not np.all(np.isfinite(v)) or np.any(np.diff(v) < 0):
                raise DomainError(f"{name} must be a non-empty sorted finite 1-D array")
            object.__setattr__(self, name, v)
        if self.theta0[0] < 0 or self.theta0[-1] > np.pi:
            raise DomainError("theta0 must lie in [0, pi]")
        if self.gamma_tau[0] < 0:
            raise DomainError("gamma_tau must be non-negative")

    def preparations(self) -> BlochState:
        """Pure preparations broadcast along axis 0 (theta0) of the cell grid."""
        th = self.theta0[:, None]
        return BlochState.from_angles(th, self.phi0)

    def params(self) -> GadParams:
        return GadParams(self.temperature, 1.0, self.gamma_tau[None, :])


@dataclass(frozen=True)
class ScanResult:
    """Per-cell metrology on a (theta0, gamma_tau) grid, indexed [i_theta, j_time]."""

    grid: ScanGrid
    qfi: np.ndarray
    heat_capacity: np.ndarray
    energy_variance: np.ndarray
    bound_ratio: np.ndarray

    @property
    def argmax(self):
        """(i_theta, j_time) of the largest QFI, tie-broken by time then angle."""
        flat = int(np.argmax(self.qfi.T))
        j, i = np.unravel_index(flat, self.qfi.T.shape)
        return int(i), int(j)

    @property
    def best(self):
        i, j = self.argmax
        return self.grid.theta0[i], self.grid.gamma_tau[j], self.qfi[i, j]

    def best_theta_per_time(self) -> np.ndarray:
        return self.grid.theta0[np.argmax(self.qfi, axis=0)]

    def best_time_per_theta(self) -> np.ndarray:
        return self.grid.gamma_tau[np.argmax(self.qfi, axis=1)]


def scan_qfi(g: ScanGrid) -> ScanResult:
    prep = g.preparations()
    p = g.params()
    shape = (g.theta0.size, g.gamma_tau.size)
    r = evolve_bloch(prep, p)

    def full(x):
        return np.broadcast_to(np.asarray(x, dtype=float), shape).copy()

    return ScanResult(
        grid=g,
        qfi=full(met.qfi_closed_form(prep, p)),
        heat_capacity=full(met.heat_capacity(prep, p)),
        energy_variance=full(met.energy_variance(r)),
        bound_ratio=full(met.bound_ratio(prep, p)),
    )


@dataclass(frozen=True)
class Optimum:
    theta0: float
    gamma_tau: float
    qfi: float
    interior: bool


def _qfi_at(theta0, gamma_tau, T, phi0=0.0):
    return float(met.qfi_closed_form(BlochState.from_angles(theta0, phi0), GadParams(T, 1.0, gamma_tau)))


def _golden_refine(f, xs, values, i, tol):
    """Golden-section search for a maximum of f on the grid cell around xs[i]."""
    if i == 0 or i == len(xs) - 1:
        return xs[i], values[i]
    try:
        res = minimize_scalar(lambda x: -f(x), bracket=(xs[i - 1], xs[i], xs[i + 1]),
                              method="golden", tol=tol)
    except ValueError:
        # flat bracket (equal neighbours): the grid point already is the optimum
        return xs[i], values[i]
    x, v = float(res.x), float(-res.fun)
    if v < values[i] or not xs[i - 1] <= x <= xs[i + 1]:
        return xs[i], values[i]
    return x, v


def optimal_time(prep: BlochState, T: float, bracket=(0.01, 10.0), steps: int = 400,
                 tol: float = 1e-6) -> Optimum:
    """Maximise Q_T over gamma*tau for a fixed preparation.

    ``interior`` is False when the grid maximum sits on a bracket edge.
    """
    xs = np.geomspace(*bracket, steps) if bracket[0] > 0 else np.linspace(*bracket, steps)
    q = np.asarray(met.qfi_closed_form(prep, GadParams(T, 1.0, xs)), dtype=float)
    i = int(np.argmax(q))
    theta0 = float(np.arctan2(np.hypot(prep.r1, prep.r2), prep.r3))

    def f(x):
        return float(met.qfi_closed_form(prep, GadParams(T, 1.0, x)))

    # golden tol is relative to |x|
    x, v = _golden_refine(f, xs, q, i, tol / max(xs[i], 1e-12))
    return Optimum(theta0, float(x), float(v), 0 < i < steps - 1)


def optimal_preparation(T: float, gamma_tau: float | None = None, theta_steps: int = 181,
                        time_grid=None, tol: float = 1e-6) -> Optimum:
    """Maximise Q_T over theta0, at a fixed gamma*tau or jointly with a free time.

    The QFI is even about both poles, so a pole argmax is a genuine maximum.
    """
    thetas = default_theta0(theta_steps)
    if gamma_tau is not None:
        q = np.asarray(met.qfi_closed_form(BlochState.from_angles(thetas), GadParams(T, 1.0, gamma_tau)))
        i = int(np.argmax(q))
        x, v = _golden_refine(lambda th: _qfi_at(th, gamma_tau, T), thetas, q, i, tol)
        return Optimum(float(x), float(gamma_tau), float(v), 0 < i < theta_steps - 1)

    times = default_gamma_tau() if time_grid is None else np.asarray(time_grid, dtype=float)
    res = scan_qfi(ScanGrid(thetas, times, T))
    i, j = res.argmax
    th0, gt0, q0 = float(thetas[i]), float(times[j]), float(res.qfi[i, j])
    if i in (0, theta_steps - 1):
        opt = optimal_time(BlochState.from_angles(th0), T, (times[0], times[-1]), times.size, tol)
        return Optimum(th0, opt.gamma_tau, max(opt.qfi, q0), opt.interior)

    bounds = [(thetas[0], thetas[-1]), (times[0], times[-1])]
    sol = minimize(lambda v: -_qfi_at(v[0], v[1], T), x0=[th0, gt0], method="Nelder-Mead",
                   bounds=bounds, options={"xatol": tol, "fatol": 1e-14})
    if -sol.fun >= q0:
        th0, gt0, q0 = float(sol.x[0]), float(sol.x[1]), float(-sol.fun)
    return Optimum(th0, gt0, q0, 0 < j < times.size - 1)


def _dr3_dT(prep, T, gamma_tau):
    return np.asarray(evolve_bloch_dT(prep, GadParams(T, 1.0, gamma_tau)).dr3)


def find_qfi_zero(T: float, prep: BlochState = EXCITED, gamma_tau_max: float = 50.0,
                  samples: int = 4000, xtol: float = 1e-10):
    """First gamma*tau in (0, gamma_tau_max] where dr3/dT changes sign, or None.

    For a diagonal preparation that is where the QFI vanishes.
    """
    if prep.r1 != 0.0 or prep.r2 != 0.0:
        raise DomainError("the QFI zero search needs a diagonal (pole) preparation")
    xs = np.geomspace(gamma_tau_max * 1e-8, gamma_tau_max, samples)
    d = _dr3_dT(prep, T, xs)
    flips = np.nonzero(np.sign(d[:-1]) * np.sign(d[1:]) < 0)[0]
    if flips.size == 0:
        return None
    k = int(flips[0])
    return float(bisect(lambda x: float(_dr3_dT(prep, T, x)), xs[k], xs[k + 1], xtol=xtol))


def _table(**cols):
    return {k: np.asarray(v) for k, v in cols.items()}


def figure_curves(which: str, T: float = 2.0, gamma_tau=None, theta_steps: int = 181,
                  shots: int = 10_000, repetitions: int = 1000, seed: int = 12345):
    """Plot-ready tables for one figure, as {table_name: {column: 1-D array}}.

    fig1: Q_T and C_T^2/Var(E) versus gamma*tau for four preparations.
    fig3: QCRB and energy CRB curves plus simulated Delta T for three preparations.
    fig4: the QFI landscape and its slice at gamma*tau = 0.6.
    """
    if which == "fig1":
        gts = default_gamma_tau() if gamma_tau is None else np.asarray(gamma_tau, dtype=float)
        rows = {"panel": [], "theta0": [], "gamma_tau": [], "qfi": [], "energy_bound": []}
        p = GadParams(T, 1.0, gts)
        for name, th in FIG1_PANELS:
            prep = BlochState.from_angles(th)
            q = np.asarray(met.qfi_closed_form(prep, p))
            fcl = np.asarray(met.classical_fisher_energy(prep, p))
            rows["panel"] += [name] * gts.size
            rows["theta0"] += [th] * gts.size
            rows["gamma_tau"] += list(gts)
            rows["qfi"] += list(q)
            rows["energy_bound"] += list(fcl)
        return {"curves": _table(**rows)}

    if which == "fig3":
        gts = np.geomspace(0.05, 5.0, 24) if gamma_tau is None else np.asarray(gamma_tau, dtype=float)
        curve = {"panel": [], "gamma_tau": [], "qcrb": [], "crb": []}
        points = {"panel": [], "gamma_tau": [], "delta_t_mean": [], "delta_t_std": []}
        seeds = make_rng(seed).integers(0, 2**63, size=(len(FIG3_PANELS), gts.size))
        for k, (name, th) in enumerate(FIG3_PANELS):
            prep = BlochState.from_angles(th)
            p = GadParams(T, 1.0, gts)
            curve["panel"] += [name] * gts.size
            curve["gamma_tau"] += list(gts)
            curve["qcrb"] += list(np.atleast_1d(met.qcrb(prep, p, shots)))
            curve["crb"] += list(np.atleast_1d(met.crb_energy(prep, p, shots)))
            for j, gt in enumerate(gts):
                s = run_rounds(prep, GadParams(T, 1.0, gt), shots, repetitions, int(seeds[k, j]), invert=False)
                points["panel"].append(name)
                points["gamma_tau"].append(gt)
                points["delta_t_mean"].append(s.delta_t_mean)
                points["delta_t_std"].append(s.delta_t_std)
        return {"curves": _table(**curve), "points": _table(**points)}

    if which == "fig4":
        gts = default_gamma_tau() if gamma_tau is None else np.asarray(gamma_tau, dtype=float)
        res = scan_qfi(ScanGrid(default_theta0(theta_steps), gts, T))
        th, gt = np.meshgrid(res.grid.theta0, res.grid.gamma_tau, indexing="ij")
        landscape = _table(theta0=th.ravel(), gamma_tau=gt.ravel(), qfi=res.qfi.ravel())
        thetas = default_theta0(theta_steps)
        q = met.qfi_closed_form(BlochState.from_angles(thetas), GadParams(T, 1.0, SLICE_GAMMA_TAU))
        return {"landscape": landscape, "slice": _table(theta0=thetas, qfi=q)}

    raise ValueError(f"unknown figure {which!r}; expected fig1, fig3 or fig4")
