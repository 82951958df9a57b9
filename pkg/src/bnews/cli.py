"""Command-line front end.

Subcommands
    simulate   generate a bounded-noise time series (CSV or binary)
    scan       minimal-invariant-set scan of a built-in family
    warn       early-warning derivative scan over simulated series
    koper      return-map, invariant-set and derivative sweeps of the
               fast-slow oscillator case study

Exit codes: 0 success; 1 runtime failure; 2 usage, configuration or I/O
error; 10 success with the early-warning flag raised (warn only).

Every CSV starts with ``# key=value`` comment lines carrying the fully
merged configuration, so outputs are reproducible from their own header.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import estimator, families, koper, plots, rdsim, setvalued
from .config import RunConfig
from .errors import BnewsError, ConfigError, InvalidArgumentError

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2
EXIT_FLAG = 10


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_table(path, cfg: RunConfig, command, columns, rows):
    with open(path, "w") as fh:
        fh.write(f"# command={command}\n")
        fh.write(f"# prng={rdsim.PRNG_ID}\n")
        for line in cfg.header_lines():
            fh.write(line + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def _out_dir(args) -> Path:
    out = Path(args.out or ".")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}")
    return out


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, int(args.threads))
    env = os.environ.get("BNEWS_THREADS", "")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"BNEWS_THREADS={env!r} is not an integer")
    return 1


def _alpha_grid(cfg, section):
    lo = cfg.require_float(section, "alpha_min")
    hi = cfg.require_float(section, "alpha_max")
    n = cfg.get_int(section, "alpha_steps", 41)
    if not lo < hi or n < 2:
        raise ConfigError("need alpha_min < alpha_max and alpha_steps >= 2")
    return np.linspace(lo, hi, n)


def _family_scalar_parts(cfg, section):
    """(name, alpha -> (f, df, d2f), sigma default) for the map families."""
    name = cfg.get_str(section, "family", "linear")
    if name == "linear":
        slope = cfg.get_float(section, "slope", 0.5)
        offset = cfg.get_float(section, "offset", 0.0)
        return name, families.linear_parts(slope, offset), 1.0, (slope, offset)
    if name == "pitchfork":
        return name, families.pitchfork_parts, 0.5, None
    if name == "doubling":
        return name, families.doubling_parts, 0.015, None
    raise ConfigError(f"unknown family {name!r} (linear|pitchfork|doubling)")


def _set_family(cfg, section, alpha_grid=None):
    """SetValuedMapFamily for scan/warn, alpha range widened to the grid."""
    name = cfg.get_str(section, "family", "linear")
    if name not in families.BUILTIN_FAMILIES:
        raise ConfigError(f"unknown family {name!r} (linear|pitchfork|doubling)")
    kwargs = {}
    sigma = cfg.get_float(section, "sigma")
    if sigma is not None:
        kwargs["sigma"] = sigma
    if name == "linear":
        slope = cfg.get_float(section, "slope")
        if slope is not None:
            kwargs["slope"] = slope
    fam = families.BUILTIN_FAMILIES[name](**kwargs)
    if alpha_grid is not None:
        pad = 1e-9 + 1e-3 * (alpha_grid[-1] - alpha_grid[0])
        lo = min(fam.alpha_domain[0], alpha_grid[0] - pad)
        hi = max(fam.alpha_domain[1], alpha_grid[-1] + pad)
        fam = replace(fam, alpha_domain=(lo, hi))
    return name, fam


def _simulated_series(cfg, section, alpha, seed, n_steps, burn_in):
    name, parts, sigma_default, affine = _family_scalar_parts(cfg, section)
    sigma = cfg.get_float(section, "sigma", sigma_default)
    if sigma <= 0:
        raise ConfigError("sigma must be positive")
    noise = rdsim.NoiseModel.uniform(-sigma, sigma)
    f = parts(alpha)[0]
    affine_pair = (affine[0], affine[1] + alpha) if affine is not None else None
    rmap = rdsim.additive_random_map(f, noise, name=name, affine=affine_pair)
    x0 = cfg.get_float(section, "x0", 0.0)
    guard = None
    g_lo = cfg.get_float(section, "guard_lo")
    g_hi = cfg.get_float(section, "guard_hi")
    if g_lo is not None and g_hi is not None:
        guard = (g_lo, g_hi)
    series = rdsim.simulate(rmap, noise, x0, n_steps, burn_in, seed, guard)
    series.meta["alpha"] = float(alpha)
    series.meta["sigma"] = float(sigma)
    return series


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_simulate(cfg: RunConfig, args) -> int:
    sec = "simulate"
    out = _out_dir(args)
    seed = cfg.get_int(sec, "seed", 0)
    n_steps = cfg.get_int(sec, "n_steps", 10_000)
    burn_in = cfg.get_int(sec, "burn_in", rdsim.DEFAULT_BURN_IN)
    alpha = cfg.get_float(sec, "alpha", 0.0)
    series = _simulated_series(cfg, sec, alpha, seed, n_steps, burn_in)
    series.meta.update(cfg.metadata())
    fmt = cfg.get_str(sec, "format", "csv")
    if fmt == "csv":
        target = out / "series.csv"
        rdsim.write_csv(target, series)
    elif fmt == "bnts":
        target = out / "series.bnts"
        rdsim.write_bnts(target, series.samples)
    else:
        raise ConfigError(f"unknown format {fmt!r} (csv|bnts)")
    print(f"wrote {target} ({len(series)} samples, "
          f"support [{float(series.samples.min())!r}, "
          f"{float(series.samples.max())!r}])")
    if not args.no_plot:
        print(f"wrote {plots.series_plot(series, out / 'series.png')}")
    return EXIT_OK


def cmd_scan(cfg: RunConfig, args) -> int:
    sec = "scan"
    out = _out_dir(args)
    grid = _alpha_grid(cfg, sec)
    name, fam = _set_family(cfg, sec, grid)
    reports = setvalued.bifurcation_scan(fam, grid)
    sets = []
    rows = []
    for alpha in grid:
        try:
            union = setvalued.minimal_invariant_sets(fam, alpha)
        except BnewsError as exc:
            sets.append(None)
            rows.append((alpha, 0, -1, float("nan"), float("nan"), str(exc)))
            continue
        sets.append(union)
        for i, (lo, hi) in enumerate(union.components):
            rows.append((alpha, len(union.components), i, lo, hi, ""))
    _write_table(out / "scan_sets.csv", cfg, "scan",
                 ("alpha", "comp_count", "comp_index", "lo", "hi", "error"),
                 rows)
    report_payload = {
        "family": name,
        "config": cfg.metadata(),
        "bifurcations": [
            {
                "alpha_star": r.alpha_star,
                "kind": r.kind,
                "components_before": r.components_before,
                "components_after": r.components_after,
                "hausdorff_jump": r.hausdorff_jump,
                "boundary_derivatives": r.boundary_derivatives,
                "composition_derivatives": r.composition_derivatives,
                "error": r.error,
            }
            for r in reports
        ],
    }
    with open(out / "scan_report.json", "w") as fh:
        json.dump(report_payload, fh, indent=2)
    found = [r for r in reports if r.error is None]
    print(f"wrote {out / 'scan_sets.csv'} and {out / 'scan_report.json'} "
          f"({len(found)} bifurcation(s) found)")
    for r in found:
        print(f"  {r.kind} at alpha={r.alpha_star!r} "
              f"({r.components_before} -> {r.components_after} components)")
    if not args.no_plot:
        path = plots.bifurcation_diagram(
            grid, sets, out / "scan.png",
            bif_points=[r.alpha_star for r in found],
        )
        print(f"wrote {path}")
    return EXIT_OK


def cmd_warn(cfg: RunConfig, args) -> int:
    sec = "warn"
    out = _out_dir(args)
    grid = _alpha_grid(cfg, sec)
    seed = cfg.get_int(sec, "seed", 0)
    n_steps = cfg.get_int(sec, "n_steps", 20_000)
    burn_in = cfg.get_int(sec, "burn_in", rdsim.DEFAULT_BURN_IN)
    threshold = cfg.get_float(
        sec, "threshold", 1.0 - estimator.DEFAULT_THRESHOLD_MARGIN
    )
    policy = estimator.WindowPolicy(
        variant=cfg.get_str(sec, "variant", "additive"),
        side=cfg.get_str(sec, "side", "lower"),
        delta=cfg.get_float(sec, "delta", 0.05),
        gap=cfg.get_float(sec, "gap", 0.02),
        epsilon=cfg.get_float(sec, "epsilon"),
        k_min=cfg.get_int(sec, "k_min", estimator.DEFAULT_K_MIN),
    )
    if policy.variant not in ("additive", "general"):
        raise ConfigError("variant must be 'additive' or 'general'")
    seeds = rdsim.split_seeds(seed, len(grid))
    series_per_alpha = {}
    f_minus_per_alpha = {}
    sim_errors = {}
    _, parts, sigma_default, _ = _family_scalar_parts(cfg, sec)
    sigma = cfg.get_float(sec, "sigma", sigma_default)

    # seeds are pre-split per parameter, so the result is identical for
    # any worker count
    def one(alpha_child):
        alpha, child = alpha_child
        try:
            return alpha, _simulated_series(
                cfg, sec, alpha, child, n_steps, burn_in
            ), None
        except BnewsError as exc:
            return alpha, None, str(exc)

    tasks = [(float(a), s) for a, s in zip(grid, seeds)]
    n_workers = _threads(args)
    if n_workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            outcomes = list(pool.map(one, tasks))
    else:
        outcomes = [one(t) for t in tasks]
    for alpha, series, err in outcomes:
        if err is not None:
            sim_errors[alpha] = err
            continue
        series_per_alpha[alpha] = series
        f = parts(alpha)[0]
        f_minus_per_alpha[alpha] = (lambda f=f: lambda x: f(x) - sigma)()
    if len(series_per_alpha) < 2:
        raise ConfigError(
            "fewer than 2 parameters produced a series; "
            f"simulation errors: {sim_errors}"
        )
    rows = estimator.warning_scan(
        series_per_alpha, policy, threshold, f_minus_per_alpha
    )
    for alpha, msg in sim_errors.items():
        rows.append(estimator.WarningRow(alpha=alpha, error=msg))
    rows.sort(key=lambda r: r.alpha)
    _write_table(out / "warn.csv", cfg, "warn",
                 ("alpha", "D", "k1", "k2", "slack", "flag", "error"),
                 [(r.alpha, r.D, r.k1, r.k2, r.slack, r.flag, r.error or "")
                  for r in rows])
    flagged = [r for r in rows if r.flag]
    print(f"wrote {out / 'warn.csv'} "
          f"({len(flagged)} of {len(rows)} parameters flagged)")
    if not args.no_plot:
        print(f"wrote {plots.warning_plot(rows, out / 'warn.png', threshold)}")
    return EXIT_FLAG if flagged else EXIT_OK


def _koper_config(cfg: RunConfig, lam, seed) -> koper.KoperConfig:
    sec = "koper"
    return koper.KoperConfig(
        eps=cfg.get_float(sec, "eps", koper.KoperConfig.eps),
        k=cfg.get_float(sec, "k", koper.KoperConfig.k),
        lam=lam,
        dt=cfg.get_float(sec, "dt", koper.KoperConfig.dt),
        sigma=cfg.get_float(sec, "sigma", 0.01),
        seed=seed,
        noise_mode=cfg.get_str(sec, "noise_mode", koper.KoperConfig.noise_mode),
        noise_dt=cfg.get_float(sec, "noise_dt", koper.KoperConfig.noise_dt),
    )


def _koper_section(cfg: RunConfig) -> koper.SectionSpec:
    sec = "koper"
    base = koper.SectionSpec()
    return koper.SectionSpec(
        z_range=(
            cfg.get_float(sec, "z_min", base.z_range[0]),
            cfg.get_float(sec, "z_max", base.z_range[1]),
        ),
        min_return_time=cfg.get_float(
            sec, "min_return_time", base.min_return_time
        ),
    )


def cmd_koper(cfg: RunConfig, args) -> int:
    sec = "koper"
    out = _out_dir(args)
    mode = cfg.get_str(sec, "mode", "all")
    if mode not in ("all", "return", "sweep", "derivative"):
        raise ConfigError("mode must be all|return|sweep|derivative")
    seed = cfg.get_int(sec, "seed", 0)
    section = _koper_section(cfg)
    lam_lo = cfg.get_float(sec, "lam_min", -6.9)
    lam_hi = cfg.get_float(sec, "lam_max", -6.859)
    lam_n = cfg.get_int(sec, "lam_steps", 15)
    if not lam_lo < lam_hi or lam_n < 2:
        raise ConfigError("need lam_min < lam_max and lam_steps >= 2")
    lam_grid = np.linspace(lam_lo, lam_hi, lam_n)
    threads = _threads(args)

    if args.dt_check:
        _koper_dt_check(cfg, args, out, section)

    sweep = None
    if mode in ("return", "all"):
        lam = cfg.get_float(sec, "lam", lam_lo)
        kcfg = _koper_config(cfg, lam, seed)
        zs = np.linspace(section.z_range[0], section.z_range[1],
                         cfg.get_int(sec, "z_steps", 41))
        n_per_z = cfg.get_int(sec, "n_per_z", 30 if kcfg.sigma > 0 else 1)
        if kcfg.sigma > 0:
            cloud = koper.stochastic_return_cloud(kcfg, section, zs, n_per_z)
            samples, errors = cloud.samples, cloud.errors
        else:
            samples = [
                koper.return_map_sample(z, kcfg, section) for z in zs
            ]
            errors = []
        _write_table(out / "koper_return.csv", cfg, "koper",
                     ("lambda", "z_in", "z_out", "steps", "early_flag"),
                     [(lam, s.z_in, s.z_out, s.crossing_time,
                       s.early_return_flag) for s in samples])
        print(f"wrote {out / 'koper_return.csv'} "
              f"({len(samples)} samples, {len(errors)} failures)")
        if not args.no_plot:
            print(f"wrote {plots.return_map_plot(samples, out / 'koper_return.png')}")

    if mode in ("sweep", "all", "derivative"):
        kcfg = _koper_config(cfg, lam_lo, seed)
        sweep = koper.invariant_set_sweep(
            kcfg, section, lam_grid,
            orbit_length=cfg.get_int(sec, "orbit_length", 300),
            burn_returns=cfg.get_int(sec, "burn_returns", 40),
            gap_tol=cfg.get_float(sec, "gap_tol", 0.05),
            jump_tol=cfg.get_float(sec, "jump_tol", 5.0),
            threads=threads,
        )
    if mode in ("sweep", "all"):
        rows = []
        for i, (lam, union, err) in enumerate(
            zip(sweep.lambdas, sweep.sets, sweep.errors)
        ):
            step = sweep.hausdorff_steps[i - 1] if i > 0 else None
            step = float("nan") if step is None else step
            if union is None:
                rows.append((lam, 0, -1, float("nan"), float("nan"),
                             step, err or ""))
                continue
            for j, (lo, hi) in enumerate(union.components):
                rows.append((lam, len(union.components), j, lo, hi, step, ""))
        _write_table(out / "koper_sweep.csv", cfg, "koper",
                     ("lambda", "comp_count", "comp_index", "lo", "hi",
                      "hausdorff_step", "error"), rows)
        print(f"wrote {out / 'koper_sweep.csv'} "
              f"(jump lambdas: {sweep.jump_lambdas})")
        if not args.no_plot:
            print(f"wrote {plots.koper_sweep_plot(sweep, out / 'koper_sweep.png')}")

    if mode in ("derivative", "all"):
        kcfg = _koper_config(cfg, lam_lo, seed)
        rows = koper.boundary_derivative_sweep(
            kcfg, section, lam_grid,
            n_real=cfg.get_int(sec, "n_real", 500),
            eps_fd=cfg.get_float(sec, "eps_fd", 0.01),
            supports=sweep.as_dict() if sweep is not None else None,
        )
        table = []
        for r in rows:
            table.append((r.lam, r.d_lambda, "crn-min", r.n_ok,
                          r.boundary, r.error or ""))
            if np.isfinite(r.estimator_D):
                table.append((r.lam, r.estimator_D, "series-estimator",
                              r.n_ok, r.boundary, ""))
        _write_table(out / "koper_derivative.csv", cfg, "koper",
                     ("lambda", "d_lambda", "method", "n_ok", "boundary",
                      "error"), table)
        crossed = [r.lam for r in rows
                   if r.error is None and np.isfinite(r.d_lambda)
                   and r.d_lambda >= 1.0]
        note = f"first crossing of 1 at lambda={min(crossed)!r}" if crossed \
            else "no crossing of 1 in the window"
        print(f"wrote {out / 'koper_derivative.csv'} ({note})")
        if not args.no_plot:
            print(f"wrote {plots.derivative_plot(rows, out / 'koper_derivative.png')}")
    return EXIT_OK


def _koper_dt_check(cfg, args, out, section):
    """Deterministic convergence report: fixed point and slope at dt, dt/2."""
    sec = "koper"
    lam = cfg.get_float(sec, "lam", cfg.get_float(sec, "lam_min", -6.9))
    rows = []
    prev = None
    for factor in (1.0, 0.5):
        kcfg = replace(_koper_config(cfg, lam, 0), sigma=0.0)
        kcfg = replace(kcfg, dt=kcfg.dt * factor)
        z_star, slope = koper.deterministic_derivative_at_fixed_point(
            kcfg, section
        )
        rows.append((kcfg.dt, z_star, slope,
                     float("nan") if prev is None else abs(z_star - prev[0]),
                     float("nan") if prev is None else abs(slope - prev[1])))
        prev = (z_star, slope)
    _write_table(out / "koper_dt_check.csv", cfg, "koper",
                 ("dt", "z_star", "slope", "delta_z_star", "delta_slope"),
                 rows)
    print(f"wrote {out / 'koper_dt_check.csv'} "
          f"(halving dt moved z* by {rows[-1][3]!r}, slope by {rows[-1][4]!r})")


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bnews",
        description="Bifurcation detection and early-warning signals for "
                    "bounded-noise random dynamical systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("simulate", "generate a bounded-noise time series"),
        ("scan", "minimal-invariant-set scan of a map family"),
        ("warn", "early-warning derivative scan (exit 10 when flagged)"),
        ("koper", "fast-slow oscillator return-map case study"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="config file path")
        p.add_argument("--seed", type=int, default=None,
                       help="override the seed in the config")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (fallback: BNEWS_THREADS)")
        p.add_argument("--dt-check", action="store_true", dest="dt_check",
                       help="also run the integrator convergence check")
        p.add_argument("--no-plot", action="store_true",
                       help="skip figure rendering")
    return parser


_COMMANDS = {
    "simulate": cmd_simulate,
    "scan": cmd_scan,
    "warn": cmd_warn,
    "koper": cmd_koper,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.from_file(args.config)
        if args.seed is not None:
            cfg = cfg.override(args.command, seed=args.seed)
        return _COMMANDS[args.command](cfg, args)
    except (ConfigError, InvalidArgumentError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BnewsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
