"""Command-line front end: trajectory | metrology | verify | experiment | scan.

Every command writes a dataset, i.e. one or more named tables. A single-table
dataset is plain CSV (header first); several tables are separated by
``# table: <name>`` lines. JSON output maps table names to lists of row
objects. Non-finite numbers are written as ``inf``, ``-inf`` or ``nan`` (as
strings in JSON). Exit status: 0 success, 1 verification failure, 2 usage or
configuration error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import metrology as met
from .model import BlochState, DomainError, GadParams, evolve_bloch
from .scan import SLICE_GAMMA_TAU, ScanGrid, find_qfi_zero, optimal_preparation, scan_qfi
from .shots import make_rng, run_rounds
from .verification import WEIGHT_SCHEMES, run_verification

COMMANDS = ("trajectory", "metrology", "verify", "experiment", "scan")

# (tau_min, tau_max, tau_steps, tau_scale) per command
TAU_DEFAULTS = {
    "trajectory": (0.0, 50.0, 501, "linear"),
    "metrology": (0.01, 50.0, 400, "log"),
    "experiment": (0.1, 5.0, 12, "log"),
    "scan": (0.01, 10.0, 400, "log"),
    "verify": (None, None, None, None),
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    temperature: float = 2.0
    gamma: float = 1.0
    tau: float | None = None
    tau_min: float | None = None
    tau_max: float | None = None
    tau_steps: int | None = None
    tau_scale: str | None = None
    theta0: float = 0.0
    phi0: float = 0.0
    shots: int = 10_000
    repetitions: int = 1000
    seed: int = 12345
    grid_theta_steps: int = 181
    format: str = "csv"
    output: str | None = None
    iad_weight: str = "thermal"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if self.iad_weight not in WEIGHT_SCHEMES:
            raise ConfigError(f"iad_weight must be one of {sorted(WEIGHT_SCHEMES)}")
        lo, hi, steps, scale = TAU_DEFAULTS[self.command]
        self.tau_min = lo if self.tau_min is None else self.tau_min
        self.tau_max = hi if self.tau_max is None else self.tau_max
        self.tau_steps = steps if self.tau_steps is None else self.tau_steps
        self.tau_scale = scale if self.tau_scale is None else self.tau_scale
        if self.shots < 1 or self.repetitions < 1 or self.grid_theta_steps < 2:
            raise ConfigError("shots and repetitions must be >= 1, grid-theta-steps >= 2")
        if not 0.0 <= self.theta0 <= math.pi:
            raise ConfigError("theta0 must lie in [0, pi]")
        try:
            GadParams(self.temperature, self.gamma, 0.0)
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

    def taus(self) -> np.ndarray:
        if self.tau is not None:
            if self.tau < 0:
                raise ConfigError("tau must be non-negative")
            return np.array([float(self.tau)])
        if self.tau_steps < 1 or self.tau_max < self.tau_min or self.tau_min < 0:
            raise ConfigError("need 0 <= tau-min <= tau-max and tau-steps >= 1")
        if self.tau_scale == "log":
            if self.tau_min <= 0:
                raise ConfigError("log-spaced tau grids need tau-min > 0")
            return np.geomspace(self.tau_min, self.tau_max, self.tau_steps)
        if self.tau_scale == "linear":
            return np.linspace(self.tau_min, self.tau_max, self.tau_steps)
        raise ConfigError("tau-scale must be log or linear")

    def preparation(self) -> BlochState:
        return BlochState.from_angles(self.theta0, self.phi0)

    def params(self, tau) -> GadParams:
        return GadParams(self.temperature, self.gamma, tau)


# ---------------------------------------------------------------------------
# commands; each returns (dataset, exit status)


def cmd_trajectory(cfg: RunConfig):
    taus = cfg.taus()
    r = evolve_bloch(cfg.preparation(), cfg.params(taus))
    cols = {
        "tau": taus,
        "r1": r.r1,
        "r2": r.r2,
        "r3": r.r3,
        "E": met.mean_energy(r),
        "varE": met.energy_variance(r),
    }
    return {"trajectory": _columns(cols, taus.size)}, 0


def _flags(ratio, qcrb, crb):
    out = []
    if np.isnan(ratio):
        out.append("undefined_ratio")
    elif abs(ratio - 1.0) < met.SATURATION_TOL:
        out.append("saturated")
    if np.isinf(qcrb):
        out.append("qfi_zero")
    if np.isinf(crb):
        out.append("capacity_zero")
    return "|".join(out)


def cmd_metrology(cfg: RunConfig):
    taus = cfg.taus()
    prep, p = cfg.preparation(), cfg.params(taus)
    r = evolve_bloch(prep, p)
    ratio = np.broadcast_to(met.bound_ratio(prep, p), taus.shape)
    crb = np.broadcast_to(met.crb_energy(prep, p, cfg.shots), taus.shape)
    qcrb = np.broadcast_to(met.qcrb(prep, p, cfg.shots), taus.shape)
    cols = {
        "tau": taus,
        "r1": r.r1,
        "r2": r.r2,
        "r3": r.r3,
        "E": met.mean_energy(r),
        "varE": met.energy_variance(r),
        "C": met.heat_capacity(prep, p),
        "Q": met.qfi_closed_form(prep, p),
        "ratio": ratio,
        "crb": crb,
        "qcrb": qcrb,
        "flags": [_flags(a, b, c) for a, b, c in zip(ratio, qcrb, crb)],
    }
    return {"metrology": _columns(cols, taus.size)}, 0


def cmd_verify(cfg: RunConfig):
    results = run_verification(cfg.iad_weight)
    table = {
        "suite": [r.name for r in results],
        "residual": [r.residual for r in results],
        "tolerance": [r.tolerance for r in results],
        "passed": ["true" if r.passed else "false" for r in results],
    }
    return {"verify": table}, 0 if all(r.passed for r in results) else 1


def cmd_experiment(cfg: RunConfig):
    taus = cfg.taus()
    prep = cfg.preparation()
    seeds = make_rng(cfg.seed).integers(0, 2**63, size=taus.size)
    rows = {k: [] for k in ("tau", "C", "Q", "crb", "qcrb", "dT_mean", "dT_std", "T_mean", "T_std", "failures")}
    for tau, seed in zip(taus, seeds):
        p = cfg.params(float(tau))
        s = run_rounds(prep, p, cfg.shots, cfg.repetitions, int(seed))
        rows["tau"].append(float(tau))
        rows["C"].append(float(met.heat_capacity(prep, p)))
        rows["Q"].append(float(met.qfi_closed_form(prep, p)))
        rows["crb"].append(float(met.crb_energy(prep, p, cfg.shots)))
        rows["qcrb"].append(float(met.qcrb(prep, p, cfg.shots)))
        rows["dT_mean"].append(s.delta_t_mean)
        rows["dT_std"].append(s.delta_t_std)
        rows["T_mean"].append(s.t_mean)
        rows["T_std"].append(s.t_std)
        rows["failures"].append(s.failures)
    return {"experiment": rows}, 0


def cmd_scan(cfg: RunConfig):
    taus = cfg.taus()
    g = ScanGrid(np.linspace(0.0, np.pi, cfg.grid_theta_steps), cfg.gamma * taus, cfg.temperature, cfg.phi0)
    res = scan_qfi(g)
    th, gt = np.meshgrid(g.theta0, g.gamma_tau, indexing="ij")
    landscape = {
        "theta0": th.ravel(),
        "tau": gt.ravel() / cfg.gamma,
        "Q": res.qfi.ravel(),
        "ratio": res.bound_ratio.ravel(),
    }
    slice_gt = SLICE_GAMMA_TAU
    q_slice = met.qfi_closed_form(BlochState.from_angles(g.theta0, cfg.phi0), GadParams(cfg.temperature, 1.0, slice_gt))
    i, j = res.argmax
    best = optimal_preparation(cfg.temperature, None, cfg.grid_theta_steps, g.gamma_tau)
    at_slice = optimal_preparation(cfg.temperature, slice_gt, cfg.grid_theta_steps)
    root = find_qfi_zero(cfg.temperature)
    summary = {
        "item": ["grid_argmax", "optimum", "slice_argmax", "qfi_zero_excited"],
        "theta0": [g.theta0[i], best.theta0, at_slice.theta0, 0.0],
        "tau": [
            g.gamma_tau[j] / cfg.gamma,
            best.gamma_tau / cfg.gamma,
            slice_gt / cfg.gamma,
            math.nan if root is None else root / cfg.gamma,
        ],
        "Q": [res.qfi[i, j], best.qfi, at_slice.qfi, math.nan if root is None else met.qfi_closed_form(
            BlochState(0.0, 0.0, 1.0), GadParams(cfg.temperature, 1.0, root))],
    }
    dataset = {
        "landscape": landscape,
        "slice": {"theta0": g.theta0, "tau": np.full(g.theta0.size, slice_gt / cfg.gamma), "Q": q_slice},
        "summary": summary,
    }
    return dataset, 0


HANDLERS = {
    "trajectory": cmd_trajectory,
    "metrology": cmd_metrology,
    "verify": cmd_verify,
    "experiment": cmd_experiment,
    "scan": cmd_scan,
}


def run(cfg: RunConfig):
    return HANDLERS[cfg.command](cfg)


# ---------------------------------------------------------------------------
# encoding


def _columns(cols, n):
    return {k: (list(v) if isinstance(v, list) else np.broadcast_to(np.asarray(v), (n,))) for k, v in cols.items()}


def _cell(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


def _json_cell(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)) and not isinstance(v, (bool, np.bool_)):
        return int(v)
    x = float(v)
    if not math.isfinite(x):
        return _cell(x)
    return float("%.17g" % x)


def _rows(table):
    names = list(table)
    return names, list(zip(*(list(table[n]) for n in names)))


def encode_dataset(dataset, fmt: str) -> str:
    if fmt == "json":
        out = {}
        for name, table in dataset.items():
            cols, rows = _rows(table)
            out[name] = [dict(zip(cols, (_json_cell(v) for v in row))) for row in rows]
        return json.dumps(out, indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for name, table in dataset.items():
        if len(dataset) > 1:
            buf.write(f"# table: {name}\n")
        cols, rows = _rows(table)
        writer.writerow(cols)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _parse_value(text: str):
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def decode_dataset(text: str, fmt: str, default_name: str | None = None):
    """Inverse of ``encode_dataset``: {table: {column: list}} with numbers parsed.

    A single-table CSV carries no table name; it is stored under ``default_name``.
    """
    if fmt == "json":
        raw = json.loads(text)
        out = {}
        for name, rows in raw.items():
            cols = list(rows[0]) if rows else []
            out[name] = {c: [_parse_value(r[c]) if isinstance(r[c], str) else r[c] for r in rows] for c in cols}
        return out
    out = {}
    name = default_name
    lines = text.splitlines()
    blocks = []
    current = []
    for line in lines:
        if line.startswith("# table: "):
            if current:
                blocks.append((name, current))
            name, current = line[len("# table: "):], []
        else:
            current.append(line)
    if current:
        blocks.append((name, current))
    for name, block in blocks:
        reader = csv.reader(block)
        cols = next(reader)
        rows = list(reader)
        out[name] = {c: [_parse_value(r[k]) for r in rows] for k, c in enumerate(cols)}
    return out


# ---------------------------------------------------------------------------
# argument handling


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qthermometry", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, argument_default=argparse.SUPPRESS)
        p.add_argument("--config", help="JSON file with any of the options below; flags override it")
        p.add_argument("--temperature", type=float, help="bath temperature in hbar*omega/k_B (default 2)")
        p.add_argument("--gamma", type=float, help="coupling rate (default 1)")
        p.add_argument("--tau", type=float, help="single interaction time; overrides the tau grid")
        p.add_argument("--tau-min", type=float)
        p.add_argument("--tau-max", type=float)
        p.add_argument("--tau-steps", type=int)
        p.add_argument("--tau-scale", choices=("log", "linear"))
        p.add_argument("--theta0", type=float, help="polar angle of the pure preparation (default 0, excited)")
        p.add_argument("--phi0", type=float)
        p.add_argument("--shots", type=int, help="measurements per estimation round, M")
        p.add_argument("--repetitions", type=int, help="estimation rounds per time point")
        p.add_argument("--seed", type=int)
        p.add_argument("--grid-theta-steps", type=int)
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--output", help="write here instead of stdout")
        if name == "verify":
            p.add_argument("--iad-weight", choices=sorted(WEIGHT_SCHEMES),
                           help="absorption-branch weight scheme fed to the channel suites")
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    flags = vars(args).copy()
    path = flags.pop("config", None)
    if path is not None:
        try:
            loaded = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        values.update({k.replace("-", "_"): v for k, v in loaded.items()})
    values.update(flags)
    known = {f.name for f in fields(RunConfig)}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        dataset, status = run(cfg)
    except (ConfigError, DomainError) as exc:
        print(f"qthermometry: error: {exc}", file=sys.stderr)
        return 2
    text = encode_dataset(dataset, cfg.format)
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)
    if cfg.command == "verify":
        for name, residual, ok in zip(dataset["verify"]["suite"], dataset["verify"]["residual"],
                                      dataset["verify"]["passed"]):
            print(f"{'PASS' if ok == 'true' else 'FAIL'} {name}: max residual {residual:.3e}", file=sys.stderr)
    return status


if __name__ == "__main__":
    raise SystemExit(main())
