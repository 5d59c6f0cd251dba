"""Command-line front end: config parsing, subcommands, deterministic output.

Exit codes: 0 success, 1 configuration error, 2 base-state solver failure,
3 uncertified spectrum, 4 failed numerics-vs-asymptotics verification.
"""

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass, replace

import numpy as np

from . import asymptotics, base_state, model, spectrum
from .chebyshev import cgl_grid
from .errors import (DegenerateProfile, NoConvergence, PairingAmbiguous,
                     PolymhdError, ShootingNoConvergence, UncertifiedRoots)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_BASE_STATE = 2
EXIT_UNCERTIFIED = 3
EXIT_VERIFY = 4


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- output ---

def format_float(v):
    """Fixed deterministic float rendering: 17 significant digits."""
    return format(float(v), ".17g")


def atomic_write_text(path, text):
    """Write text to path via a temporary file and an atomic rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_table(path, header, rows):
    """Write a comma-separated numeric table with a fixed float format."""
    lines = [header]
    for row in np.atleast_2d(np.asarray(rows, dtype=float)):
        lines.append(",".join(format_float(v) for v in row))
    if np.asarray(rows).size == 0:
        lines = [header]
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_table_json(path, header, rows):
    """Same table as a JSON list of row objects (``--format json``)."""
    keys = header.split(",")
    parts = []
    for row in np.atleast_2d(np.asarray(rows, dtype=float)):
        body = ", ".join(f'"{k}": {format_float(v)}'
                         for k, v in zip(keys, row))
        parts.append("  {" + body + "}")
    if np.asarray(rows).size == 0:
        parts = []
    atomic_write_text(path, "[\n" + ",\n".join(parts) + "\n]\n")


# ---------------------------------------------------------------- config ---

RUN_KEYS = ("grid_n", "tol", "omega", "k_min", "k_max", "out_dir", "format",
            "variant", "r44_variant")


@dataclass(frozen=True)
class RunConfig:
    params: model.ModelParams
    grid_n: int = 129
    tol: float = 1e-10
    omega: float = 1.0
    k_min: int = 10
    k_max: int = 20
    out_dir: str = "."
    format: str = "csv"
    variant: str = "exact_elimination"
    r44_variant: str = "consistent"

    def __post_init__(self):
        if self.grid_n < 33 or self.grid_n % 2 == 0:
            raise ConfigError("grid_n must be odd and at least 33")
        if self.k_min < 1:
            raise ConfigError("k_min must be at least 1")
        if self.k_max < self.k_min:
            raise ConfigError("k_max must not be smaller than k_min")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.format!r}")
        if self.variant not in ("exact_elimination", "truncated_3_2"):
            raise ConfigError(f"unknown variant {self.variant!r}")
        if self.r44_variant not in ("consistent", "literal"):
            raise ConfigError(f"unknown r44_variant {self.r44_variant!r}")
        if not (self.tol > 0.0):
            raise ConfigError("tol must be positive")

    def with_(self, **kw):
        return replace(self, **kw)

    def integrator(self):
        return spectrum.IntegratorConfig(rtol=self.tol,
                                         atol=self.tol * 1e-2,
                                         variant=self.variant)


def load_config(path):
    """Read a flat JSON config; unknown keys are a hard error."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")

    unknown = set(doc) - set(model.PARAM_KEYS) - set(RUN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        params = model.params_from_dict(
            {k: v for k, v in doc.items() if k in model.PARAM_KEYS})
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    run = {k: doc[k] for k in RUN_KEYS if k in doc}
    run.setdefault("omega", params.omega)
    try:
        return RunConfig(params=params, **run)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _solve(cfg):
    grid = cgl_grid(cfg.grid_n)
    return base_state.solve_base_state(cfg.params, grid)


def _out(cfg, stem):
    os.makedirs(cfg.out_dir, exist_ok=True)
    ext = "json" if cfg.format == "json" else "csv"
    return os.path.join(cfg.out_dir, f"{stem}.{ext}")


def _write_table(cfg, stem, header, rows):
    path = _out(cfg, stem)
    if cfg.format == "json":
        write_table_json(path, header, rows)
    else:
        atomic_write_table(path, header, rows)
    return path


def _velocity_landmarks(state):
    """(max u, argmax u, asymmetry integral y*u / integral |u|) on a fine grid."""
    y = np.linspace(-0.5, 0.5, 4001)
    u = state.sample(y, names=("u",))["u"]
    j = int(np.argmax(np.abs(u)))
    num = np.trapezoid(y * u, y)
    den = np.trapezoid(np.abs(u), y)
    asym = num / den if den > 0 else 0.0
    return float(u[j]), float(y[j]), float(asym)


# ------------------------------------------------------------ subcommands ---

def cmd_base_state(cfg):
    try:
        state = _solve(cfg)
    except (ShootingNoConvergence, NoConvergence, PolymhdError) as exc:
        print(f"base-state solve failed: {exc}", file=sys.stderr)
        return EXIT_BASE_STATE
    path = _out(cfg, "base_state")
    if cfg.format == "json":
        nodes = state.grid.nodes
        rows = np.column_stack([nodes, state.u, state.a11, state.a12,
                                state.a22, state.Z, state.L, state.P])
        write_table_json(path, "y,u,a11,a12,a22,Z,L,P", rows)
    else:
        base_state.write_base_state_csv(state, path)
    residual = base_state.base_residual(state)
    umax, y_at_max, asym = _velocity_landmarks(state)
    print(f"residual {residual:.3e}")
    print(f"max_u {umax:.10g} at y = {y_at_max:.10g}")
    print(f"asymmetry {asym:.10g}")
    print(f"wrote {path}")
    _render_plots(cfg, base=state)
    return EXIT_OK


def _spectrum_seeds(state, cfg):
    mu = asymptotics.travel_time(state)
    drift = asymptotics.drift_integral(state, cfg.omega)
    ks = np.arange(cfg.k_min, cfg.k_max + 1)
    seeds = (drift + 1j * np.pi * ks) / mu
    pad = 0.45 * np.pi / mu
    region = (seeds.real.min() - 2.0, seeds.real.max() + 2.0,
              seeds.imag.min() - pad, seeds.imag.max() + pad)
    return seeds, region


def cmd_spectrum(cfg):
    try:
        state = _solve(cfg)
    except PolymhdError as exc:
        print(f"base-state solve failed: {exc}", file=sys.stderr)
        return EXIT_BASE_STATE
    seeds, region = _spectrum_seeds(state, cfg)
    result = spectrum.find_eigenvalues(state, cfg.omega, region, seeds,
                                       cfg.integrator(), strict=False)

    path = _out(cfg, "spectrum")
    header = "re_lambda,im_lambda,residual,newton_iters,certified,seed_re,seed_im"
    rows = [[e.lam.real, e.lam.imag, e.residual, e.newton_iters,
             int(e.certified), e.seed.real, e.seed.imag]
            for e in result.eigenvalues]
    _write_table(cfg, "spectrum", header, rows)

    n_cert = sum(e.certified for e in result.eigenvalues)
    print(f"{len(result.eigenvalues)} roots, {n_cert} certified, "
          f"region winding {result.winding_total}")
    print(f"wrote {path}")
    _render_plots(cfg, spec_result=result)
    uncertified = (n_cert < len(result.eigenvalues)
                   or result.winding_total != len(result.eigenvalues))
    if uncertified:
        print("spectrum is not fully certified", file=sys.stderr)
        return EXIT_UNCERTIFIED
    return EXIT_OK


def cmd_asymptotics(cfg):
    try:
        state = _solve(cfg)
    except PolymhdError as exc:
        print(f"base-state solve failed: {exc}", file=sys.stderr)
        return EXIT_BASE_STATE
    try:
        report = asymptotics.stability_criterion(state, omega=cfg.omega)
    except DegenerateProfile as exc:
        print(f"asymptotics undefined for this profile: {exc}",
              file=sys.stderr)
        return EXIT_VERIFY
    path = os.path.join(cfg.out_dir, "asymptotics.json")
    os.makedirs(cfg.out_dir, exist_ok=True)
    asymptotics.write_asymptotics_json(report, path)
    for key, val in report.to_json_dict().items():
        print(f"{key} {val}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_verify(cfg):
    try:
        state = _solve(cfg)
    except PolymhdError as exc:
        print(f"base-state solve failed: {exc}", file=sys.stderr)
        return EXIT_BASE_STATE
    report = asymptotics.stability_criterion(state, omega=cfg.omega)
    os.makedirs(cfg.out_dir, exist_ok=True)
    asymptotics.write_asymptotics_json(
        report, os.path.join(cfg.out_dir, "asymptotics.json"))

    try:
        table, result = asymptotics.verify_spectrum(
            state, cfg.omega, (cfg.k_min, cfg.k_max), cfg.integrator())
    except (PairingAmbiguous, UncertifiedRoots, NoConvergence) as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY

    header = "k,re_num,im_num,re_asym,im_asym,err,err_times_k"
    rows = [[r.k, r.lambda_num.real, r.lambda_num.imag, r.lambda_asym.real,
             r.lambda_asym.imag, r.err, r.err_times_k] for r in table.rows]
    path = _write_table(cfg, "verify", header, rows)
    worst = max(r.err_times_k for r in table.rows)
    print(f"modes {cfg.k_min}..{cfg.k_max}, max err*k {worst:.6g}, "
          f"bounded {str(table.bounded).lower()}")
    print(f"wrote {path}")
    _render_plots(cfg, verify_table=table, spec_result=result)
    if not table.bounded:
        print("err*k grows across the mode range", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_sweep(cfg, sweep_key, values):
    if sweep_key not in model.PARAM_KEYS:
        print(f"unknown sweep parameter {sweep_key!r}", file=sys.stderr)
        return EXIT_CONFIG
    values = list(values)
    if not values:
        print("empty sweep value list", file=sys.stderr)
        return EXIT_CONFIG

    grid = cgl_grid(cfg.grid_n)
    rows = []
    successes = 0
    seed = None
    for val in values:
        params = cfg.params.with_(**{sweep_key: float(val)})
        try:
            state = base_state.solve_base_state(params, grid, shoot_seed=seed)
            report = asymptotics.stability_criterion(state, omega=cfg.omega)
            umax, _, _ = _velocity_landmarks(state)
            rows.append([val, report.criterion_S, report.re_lambda_inf,
                         abs(umax), state.newton_residual])
            seed = state.shoot_vars          # continuation for the next value
            successes += 1
        except PolymhdError as exc:
            print(f"{sweep_key} = {val}: solve failed ({exc})",
                  file=sys.stderr)
            rows.append([val, np.nan, np.nan, np.nan, np.nan])
            seed = None
    header = "value,criterion_S,re_lambda_inf,max_u,residual"
    path = _write_table(cfg, "sweep", header, rows)
    print(f"{successes}/{len(values)} sweep points solved")
    print(f"wrote {path}")
    _render_plots(cfg, sweep_rows=(header, rows))
    if successes == 0:
        return EXIT_BASE_STATE
    return EXIT_OK


def _render_plots(cfg, base=None, spec_result=None, verify_table=None,
                  sweep_rows=None):
    from . import plots
    if base is not None:
        plots.plot_base_state(base, os.path.join(cfg.out_dir, "base_state.png"))
    if spec_result is not None:
        plots.plot_spectrum(spec_result,
                            os.path.join(cfg.out_dir, "spectrum.png"))
    if verify_table is not None:
        plots.plot_verification(verify_table,
                                os.path.join(cfg.out_dir, "verify.png"))
    if sweep_rows is not None:
        plots.plot_sweep(*sweep_rows, os.path.join(cfg.out_dir, "sweep.png"))


# ---------------------------------------------------------------- driver ---

_VARIANT_ALIASES = {"exact": "exact_elimination",
                    "truncated": "truncated_3_2",
                    "exact_elimination": "exact_elimination",
                    "truncated_3_2": "truncated_3_2"}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="polymhd",
        description="Stability analysis of channel flow of a conducting "
                    "polymeric fluid: base state, point spectrum, and "
                    "large-mode asymptotics.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("base-state", "spectrum", "asymptotics", "verify", "sweep"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out-dir", default=None)
        p.add_argument("--omega", type=float, default=None)
        p.add_argument("--k-min", type=int, default=None)
        p.add_argument("--k-max", type=int, default=None)
        p.add_argument("--grid-n", type=int, default=None)
        p.add_argument("--variant", choices=sorted(_VARIANT_ALIASES),
                       default=None)
        p.add_argument("--format", choices=("csv", "json"), default=None)
        if name == "sweep":
            p.add_argument("--sweep-key", required=True)
            p.add_argument("--values", required=True,
                           help="comma-separated parameter values")
    return parser


def _apply_overrides(cfg, args):
    kw = {}
    if args.out_dir is not None:
        kw["out_dir"] = args.out_dir
    if args.omega is not None:
        kw["omega"] = args.omega
    if args.k_min is not None:
        kw["k_min"] = args.k_min
    if args.k_max is not None:
        kw["k_max"] = args.k_max
    if args.grid_n is not None:
        kw["grid_n"] = args.grid_n
    if args.variant is not None:
        kw["variant"] = _VARIANT_ALIASES[args.variant]
    if args.format is not None:
        kw["format"] = args.format
    return cfg.with_(**kw) if kw else cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = _apply_overrides(load_config(args.config), args)
        if args.command == "sweep":
            try:
                values = [float(v) for v in args.values.split(",") if v.strip()]
            except ValueError:
                print(f"bad --values list {args.values!r}", file=sys.stderr)
                return EXIT_CONFIG
            return cmd_sweep(cfg, args.sweep_key, values)
        handler = {"base-state": cmd_base_state,
                   "spectrum": cmd_spectrum,
                   "asymptotics": cmd_asymptotics,
                   "verify": cmd_verify}[args.command]
        return handler(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
