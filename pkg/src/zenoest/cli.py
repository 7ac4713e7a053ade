"""Command-line front end.

All rates and frequencies are in units of a reference Rabi frequency and
times in its inverse.  Options may come from a flat ``key = value`` config
file (``--config``); command-line flags override file values.

Exit codes: 0 success, 2 configuration error, 3 numerical or simulation
failure, 4 record impossible under every candidate.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .bayes import (PosteriorGrid, ambiguous_candidates, plan_hybrid, posterior_stats,
                    run_filter)
from .errors import ImpossibleRecordError, InvalidParameterError, ZenoError
from .fisher import (fisher_per_measurement, fisher_scan, maximize_rate, fisher_rate,
                     rabi_family, zeno_coefficients)
from .io import read_record, write_csv, write_fisher_scan, write_json, write_posterior, write_record
from .measurement import eigenbasis, flip_fraction, simulate_schedule
from .quantum import two_level_model

OUTPUT_ENV = "ZENOEST_OUTPUT_DIR"
DEFAULT_OUTPUT = "zenoest-out"

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IMPOSSIBLE = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


def _floats(text):
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    return [float(x) for x in str(text).replace(";", ",").split(",") if x.strip()]


@dataclass
class RunConfig:
    omega: float = 1.0
    delta: float = 0.0
    gamma: float = 0.0
    gamma_spont: float = 0.0
    seed: int = 0
    out: str = ""
    tau: list = field(default_factory=list)
    n: int | None = None
    t_total: float | None = None
    samples_per_interval: int = 20
    initial_label: str = "g"
    # fisher
    mode: str = "scan"
    tau_max: float = 12.0
    tau_points: int = 600
    gamma_max: float = 1.0
    gamma_points: int = 51
    t_points: int = 1000
    # bayes
    schedule: str = "hybrid"
    candidates: list = field(default_factory=list)
    grid_min: float = 0.0
    grid_max: float = 2.5
    grid_points: int = 501
    eta: float = 0.1
    record: str = ""

    def validate(self, command):
        for name in ("omega", "gamma", "gamma_spont"):
            if not np.isfinite(getattr(self, name)) or getattr(self, name) < 0:
                raise ConfigError(f"{name} must be a finite non-negative number")
        if self.n is not None and self.n < 1:
            raise ConfigError("n must be at least 1")
        if self.t_total is not None and self.t_total <= 0:
            raise ConfigError("t_total must be positive")
        if any(t <= 0 for t in self.tau):
            raise ConfigError("every tau must be positive")
        if command == "fisher" and self.mode not in ("scan", "map", "growth"):
            raise ConfigError(f"unknown fisher mode {self.mode!r}")
        if self.tau_points < 2 or self.grid_points < 2:
            raise ConfigError("grids need at least two points")
        if self.samples_per_interval < 0:
            raise ConfigError("samples_per_interval must be >= 0")


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _coerce(name, value):
    kind = _FIELD_TYPES[name]
    try:
        if kind == "list":
            return _floats(value)
        if kind == "float":
            return float(value)
        if kind == "int":
            return int(value)
        if kind.startswith("int"):
            return None if value in (None, "", "none") else int(value)
        if kind.startswith("float"):
            return None if value in (None, "", "none") else float(value)
        return str(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {name}: {value!r}") from exc


def load_config_file(path):
    """Flat ``key = value`` file (``#`` comments) into a dict of RunConfig fields."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        text = Path(path).read_text(encoding="utf-8")
        parser.read_string("[run]\n" + text)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    values = {}
    for key, value in parser["run"].items():
        name = key.replace("-", "_")
        if name not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        values[name] = _coerce(name, value)
    return values


def build_config(args):
    values = load_config_file(args.config) if args.config else {}
    for name in _FIELD_TYPES:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = _coerce(name, v)
    cfg = RunConfig(**values)
    if not cfg.out:
        cfg.out = os.environ.get(OUTPUT_ENV, DEFAULT_OUTPUT)
    return cfg


def _model(cfg, omega=None, gamma=None):
    return two_level_model(cfg.omega if omega is None else omega, cfg.delta,
                           cfg.gamma if gamma is None else gamma, cfg.gamma_spont)


def _write_manifest(out, command, cfg, argv, files):
    write_json(out / "manifest.json", {
        "command": command,
        "argv": list(argv),
        "config": dataclasses.asdict(cfg),
        "seed": cfg.seed,
        "version": __version__,
        "files": sorted(str(Path(f).relative_to(out)) for f in files),
    })


# ---------------------------------------------------------------------------
# commands

def cmd_trajectory(cfg, out):
    taus = cfg.tau or [2.5, 1.75, 0.75, 0.25]
    n = 40 if cfg.n is None else cfg.n
    model, basis = _model(cfg), eigenbasis()
    files = []
    for i, tau in enumerate(taus):
        traj = simulate_schedule(model, basis, [(tau, n)], cfg.seed + i, initial_label=cfg.initial_label,
                                 samples_per_interval=cfg.samples_per_interval)
        files.append(write_csv(out / f"populations_tau{i:02d}.csv", ["time", "excited_population"],
                               zip(traj.times, traj.populations)))
        files.extend(write_record(out / f"record_tau{i:02d}", traj.record))
    return files


def cmd_fisher(cfg, out):
    files = []
    meta = {"model": dict(omega=cfg.omega, delta=cfg.delta, gamma=cfg.gamma,
                          gamma_spont=cfg.gamma_spont)}
    if cfg.mode == "scan":
        grid = cfg.tau or list(cfg.tau_max * np.arange(1, cfg.tau_points + 1) / cfg.tau_points)
        scan = fisher_scan(cfg.omega, cfg.delta, cfg.gamma, grid, cfg.gamma_spont)
        files.extend(write_fisher_scan(out / "scan", scan, meta))
        files.append(write_csv(out / "optimum.csv", ["tau", "F_per_measurement", "F_per_time"],
                               [(scan.optimal_tau, scan.optimal_value * scan.optimal_tau,
                                 scan.optimal_value)]))
    elif cfg.mode == "map":
        gammas = np.linspace(0.0, cfg.gamma_max, cfg.gamma_points)
        rows, ridge = [], []
        for g in gammas:
            t_opt, v_opt, grid, values = maximize_rate(
                fisher_rate(cfg.omega, cfg.delta, g, cfg.gamma_spont), (0.0, cfg.tau_max), cfg.tau_points)
            rows.extend((g, t, v) for t, v in zip(grid, values))
            ridge.append((g, t_opt, v_opt))
        files.append(write_csv(out / "map.csv", ["gamma", "tau", "F_per_time"], rows))
        files.append(write_csv(out / "ridge.csv", ["gamma", "tau_opt", "F_per_time"], ridge))
        files.append(write_json(out / "map.json", dict(meta, gamma_max=cfg.gamma_max,
                                                       gamma_points=cfg.gamma_points,
                                                       tau_max=cfg.tau_max, tau_points=cfg.tau_points)))
    else:
        taus = cfg.tau or [3.0, 0.3]
        t_total = cfg.t_total or 30.0
        t_grid = t_total * np.arange(cfg.t_points + 1) / cfg.t_points
        rows = []
        for tau in taus:
            per_n = fisher_per_measurement(cfg.omega, cfg.delta, cfg.gamma, tau, cfg.gamma_spont)
            rows.extend((tau, t, np.floor(t / tau + 1e-12) * per_n) for t in t_grid)
        files.append(write_csv(out / "growth.csv", ["tau", "T", "F"], rows))
    return files


def _parse_schedule(text):
    schedule = []
    for part in str(text).split(","):
        try:
            tau, count = part.split(":")
            schedule.append((float(tau), int(count)))
        except ValueError as exc:
            raise ConfigError(f"bad schedule entry {part!r}; expected tau:count") from exc
    if any(t <= 0 or c < 0 for t, c in schedule):
        raise ConfigError("schedule needs positive tau and non-negative counts")
    return schedule


def cmd_bayes(cfg, out):
    files = []
    family = rabi_family(cfg.delta, cfg.gamma, cfg.gamma_spont)
    if cfg.candidates:
        cands = np.array(sorted(cfg.candidates))
        grid = PosteriorGrid(cands, np.full(len(cands), 1.0 / len(cands)))
    else:
        grid = PosteriorGrid.uniform(cfg.grid_min, cfg.grid_max, cfg.grid_points)

    plan = None
    if cfg.record:
        record = read_record(Path(cfg.record).with_suffix(""))
        schedule = record.schedule
    else:
        if cfg.schedule.strip().lower() == "hybrid":
            plan = plan_hybrid(cfg.t_total or 100.0, cfg.gamma, cfg.omega, float(grid.candidates[-1]),
                               eta=cfg.eta)
            schedule = plan.schedule()
            files.append(write_json(out / "plan.json", plan.to_dict()))
        else:
            schedule = _parse_schedule(cfg.schedule)
        traj = simulate_schedule(_model(cfg), eigenbasis(), schedule, cfg.seed,
                                 initial_label=cfg.initial_label,
                                 samples_per_interval=cfg.samples_per_interval)
        record = traj.record
        files.extend(write_record(out / "record", record))
        files.append(write_csv(out / "populations.csv", ["time", "excited_population"],
                               zip(traj.times, traj.populations)))

    trajectory = run_filter(record, grid, family, schedule)
    files.extend(write_posterior(out / "posterior", grid.candidates, trajectory,
                                 {"schedule": schedule, "seed": record.seed,
                                  "plan": plan.to_dict() if plan else None}))
    stats = posterior_stats(PosteriorGrid(grid.candidates, trajectory[-1]))
    aliases = {str(t): ambiguous_candidates(cfg.omega, cfg.gamma, t, float(grid.candidates[-1]))
               for t, c in schedule if c}
    files.append(write_json(out / "stats.json", dict(
        map=stats.map_estimate, mean=stats.mean, variance=stats.variance, peaks=stats.peaks,
        n_peaks=len(stats.peaks), ambiguous_candidates=aliases)))
    return files


def cmd_zeno(cfg, out):
    model, basis = _model(cfg), eigenbasis()
    rho0 = basis.state(cfg.initial_label)
    coeffs = zeno_coefficients(model, rho0)
    taus = cfg.tau or [0.01, 0.05, 0.1]
    result = {
        "a": coeffs.a,
        "b": coeffs.b,
        "initial_label": cfg.initial_label,
        "zeno_rate": [{"tau": t, "rate": coeffs.zeno_rate(t)} for t in taus],
    }
    if cfg.n:
        flips = []
        for i, tau in enumerate(taus):
            rec = simulate_schedule(model, basis, [(tau, cfg.n)], cfg.seed + i,
                                    initial_label=cfg.initial_label, samples_per_interval=0).record
            p = flip_fraction(rec)
            flips.append({"tau": tau, "n": cfg.n, "seed": cfg.seed + i,
                          "flip_fraction": p, "stderr": float(np.sqrt(p * (1 - p) / cfg.n)),
                          "predicted": -coeffs.b * tau * tau})
        result["empirical"] = flips
    return [write_json(out / "zeno.json", result)]


COMMANDS = {"trajectory": cmd_trajectory, "fisher": cmd_fisher, "bayes": cmd_bayes, "zeno": cmd_zeno}


def make_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--omega", type=float, help="Rabi frequency (true value for simulations)")
    common.add_argument("--delta", type=float)
    common.add_argument("--gamma", type=float, help="dephasing rate")
    common.add_argument("--gamma-spont", dest="gamma_spont", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV} or {DEFAULT_OUTPUT})")
    common.add_argument("--tau", help="comma-separated interval list")
    common.add_argument("--n", type=int, help="measurement count")
    common.add_argument("--t-total", dest="t_total", type=float)
    common.add_argument("--initial-label", dest="initial_label")

    parser = argparse.ArgumentParser(prog="zenoest", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trajectory", parents=[common], help="Zeno-suppressed Rabi trajectories")
    p.add_argument("--samples-per-interval", dest="samples_per_interval", type=int)

    p = sub.add_parser("fisher", parents=[common], help="Fisher information scans")
    p.add_argument("--mode", choices=["scan", "map", "growth"])
    p.add_argument("--tau-max", dest="tau_max", type=float)
    p.add_argument("--tau-points", dest="tau_points", type=int)
    p.add_argument("--gamma-max", dest="gamma_max", type=float)
    p.add_argument("--gamma-points", dest="gamma_points", type=int)
    p.add_argument("--t-points", dest="t_points", type=int)

    p = sub.add_parser("bayes", parents=[common], help="Bayesian grid filter")
    p.add_argument("--schedule", help="'hybrid' or tau:count[,tau:count...]")
    p.add_argument("--candidates", help="comma-separated candidate values (overrides the grid)")
    p.add_argument("--grid-min", dest="grid_min", type=float)
    p.add_argument("--grid-max", dest="grid_max", type=float)
    p.add_argument("--grid-points", dest="grid_points", type=int)
    p.add_argument("--eta", type=float)
    p.add_argument("--record", help="existing record (.csv with .json sidecar) instead of simulating")
    p.add_argument("--samples-per-interval", dest="samples_per_interval", type=int)

    sub.add_parser("zeno", parents=[common], help="survival coefficients and Zeno rates")
    return parser


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = make_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        cfg.validate(args.command)
    except ConfigError as exc:
        print(f"zenoest: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        files = COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"zenoest: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ImpossibleRecordError as exc:
        print(f"zenoest: impossible record: {exc}", file=sys.stderr)
        return EXIT_IMPOSSIBLE
    except InvalidParameterError as exc:
        print(f"zenoest: invalid parameter: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ZenoError, ArithmeticError, OSError, ValueError) as exc:
        print(f"zenoest: failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    _write_manifest(out, args.command, cfg, argv, files)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
