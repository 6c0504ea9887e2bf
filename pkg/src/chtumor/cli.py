"""Command-line entry points.

Subcommands:
  check-params   evaluate the dissipativity certificate; exit 0 if it is
                 satisfied, 2 otherwise
  run            integrate the PDE system, writing series.csv, snapshots
                 and summary.txt; exit 3 if the run diverged
  ode            integrate the homogeneous reduction, writing ode.csv and
                 regime.txt; exit 3 if the trajectory diverged
  sweep          evaluate a 1- or 2-axis parameter sweep into regime_map.csv

Exit codes: 0 success, 1 usage or I/O failure, 2 negative certificate,
3 diverged run.  Common flags: --config, --out, --seed, --threads.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import diagnostics, dynamics, homogeneous, storage
from .config import (
    RunConfig,
    SweepConfig,
    parse_run_config,
    parse_sweep_config,
)
from .errors import ConfigurationError, SolverError
from .model import absorption_time, check_dissipativity, make_proliferation
from .storage import fmt_float

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CERT_NEGATIVE = 2
EXIT_DIVERGED = 3


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit code 2 on usage errors; the exit-code
    contract reserves 2 for negative certificates, so remap to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chtumor", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("check-params", "evaluate the dissipativity certificate"),
        ("run", "integrate the PDE system"),
        ("ode", "integrate the homogeneous reduction"),
        ("sweep", "map regimes over a parameter grid"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the config file")
        p.add_argument("--out", default=None, help="output directory (overrides [output] dir)")
        p.add_argument("--seed", type=int, default=None, help="RNG seed (overrides [initial] seed)")
        p.add_argument("--threads", type=int, default=1, help="worker threads for sweep points")
    return parser


def _load_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None


def _apply_flags(cfg: RunConfig, args) -> RunConfig:
    updates = {}
    if args.out is not None:
        updates["out_dir"] = args.out
    if args.seed is not None:
        updates["seed"] = int(args.seed)
    return dataclasses.replace(cfg, **updates) if updates else cfg


def _ensure_out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_check_params(cfg: RunConfig) -> int:
    params = cfg.params
    pot = cfg.potential()
    prolif = cfg.proliferation()
    cert = check_dissipativity(params, pot, prolif)

    bch = params.B - params.C * prolif.h_star
    print(f"has_plateau_margin (h_star > 0 and B - C*h_star > 0): "
          f"{'ok' if cert.has_plateau_margin else 'VIOLATED'}  "
          f"[h_star = {prolif.h_star:g}, B - C*h_star = {bch:g}]")
    if cert.sigma_upper_limit is not None:
        print(f"limit_below_one (B*sigma_s/(B - C*h_star) < 1): "
              f"{'ok' if cert.limit_below_one else 'VIOLATED'}  "
              f"[limit = {cert.sigma_upper_limit:.12g}, margin = {1.0 - cert.sigma_upper_limit:.12g}]")
        print(f"apoptosis_margin (A - P*B*sigma_s/(B - C*h_star) > 0): "
              f"{'ok' if cert.apoptosis_margin else 'VIOLATED'}  "
              f"[margin = {params.A - params.P * cert.sigma_upper_limit:.12g}]")
    else:
        print("limit_below_one: VIOLATED  [B - C*h_star = 0, limit undefined]")
        print("apoptosis_margin: VIOLATED  [limit undefined]")
    print(f"superquadratic (p_beta > 2): {'ok' if cert.superquadratic else 'VIOLATED'}  "
          f"[p_beta = {pot.p_beta}]")
    print(f"sigma_lower_limit = {cert.sigma_lower_limit:.12g}")
    if cert.sigma_upper_limit is not None:
        print(f"sigma_upper_limit = {cert.sigma_upper_limit:.12g}")
    if cert.satisfied:
        print(f"epsilon_max = {cert.epsilon_max:.12g}")
        print(f"epsilon = {cert.epsilon:.12g}")
        print(f"T1(epsilon) = {cert.t1:.12g}")
        print(f"T1(epsilon_max) = {absorption_time(params, prolif, cert.epsilon_max):.12g}")
        print("verdict: dissipative")
        return EXIT_OK
    print("verdict: not dissipative")
    return EXIT_CERT_NEGATIVE


def cmd_run(cfg: RunConfig) -> int:
    out = _ensure_out_dir(cfg)
    params = cfg.params
    pot = cfg.potential()
    prolif = cfg.proliferation()
    state = cfg.initial_state()

    snapshots: list[tuple[int, dynamics.SimState]] = []
    counter = {"n": 0}

    def snap(s: dynamics.SimState) -> None:
        if cfg.snapshot_stride > 0 and counter["n"] % cfg.snapshot_stride == 0:
            snapshots.append((counter["n"], s))
        counter["n"] += 1

    report = dynamics.run(state, cfg.t_end, params, pot, prolif, cfg.scheme,
                          monitors=[snap], envelope_tol=cfg.envelope_tol)

    storage.write_series_csv(out / "series.csv", report.rows)
    for idx, s in snapshots:
        for name, f in (("phi", s.phi), ("mu", s.mu), ("sigma", s.sigma)):
            storage.write_field_snapshot(out / f"snap_{name}_{idx:06d}.dat", f, s.t)
    final = report.final_state
    for name, f in (("phi", final.phi), ("mu", final.mu), ("sigma", final.sigma)):
        storage.write_field_snapshot(out / f"final_{name}.dat", f, final.t)

    regime = homogeneous.classify_regime(params, prolif, pot)
    lines = [
        f"t_final = {fmt_float(final.t)}",
        f"steps = {report.steps_taken}",
        f"diverged = {report.diverged}",
    ]
    if report.reason:
        lines.append(f"reason = {report.reason}")
    last = report.rows[-1]
    lines += [
        f"energy = {fmt_float(last.energy)}",
        f"x_magnitude = {fmt_float(last.x_magnitude)}",
        f"mass = {fmt_float(last.mass)}",
        f"sigma_range = [{fmt_float(last.sigma_min)}, {fmt_float(last.sigma_max)}]",
        f"regime = {regime.tag}",
    ]
    if cfg.absorbing_radius is not None:
        rep = diagnostics.absorption(report.rows, cfg.absorbing_radius)
        lines += [
            f"absorption_entered = {rep.entered}",
            f"absorption_entry_time = {fmt_float(rep.entry_time) if rep.entered else 'never'}",
            f"absorption_radius = {fmt_float(rep.ball_radius_used)}",
            f"post_entry_max_magnitude = {fmt_float(rep.post_entry_max_magnitude)}",
        ]
    (out / "summary.txt").write_text("\n".join(lines) + "\n")
    return EXIT_DIVERGED if report.diverged else EXIT_OK


def cmd_ode(cfg: RunConfig) -> int:
    out = _ensure_out_dir(cfg)
    params = cfg.params
    pot = cfg.potential()
    prolif = cfg.proliferation()
    if cfg.initial_kind != "constant":
        raise ConfigurationError("the ode command needs [initial] kind = constant (phi0, sigma0)")
    start = homogeneous.HomState(cfg.initial_params["phi0"], cfg.initial_params["sigma0"])
    traj = homogeneous.integrate(start, cfg.t_end, cfg.scheme.dt, params, prolif)
    storage.write_ode_csv(out / "ode.csv", traj.t, traj.X, traj.S)

    regime = homogeneous.classify_regime(params, prolif, pot)
    lines = [f"regime = {regime.tag}", f"explanation = {regime.explanation}"]
    if params.B - params.C * prolif.h_star > 0.0:
        lo, hi = homogeneous.invariant_strip(params, prolif)
        lines.append(f"invariant_strip = [{fmt_float(lo)}, {fmt_float(hi)}]")
    else:
        lines.append("invariant_strip = undefined (B - C*h_star <= 0)")
    lines.append(f"diverged = {traj.diverged}")
    (out / "regime.txt").write_text("\n".join(lines) + "\n")
    return EXIT_DIVERGED if traj.diverged else EXIT_OK


def _sweep_point(cfg: SweepConfig, values: dict[str, float]) -> list[str]:
    """Evaluate one sweep point.  Never raises; failures land in the row."""
    base = cfg.base
    row = [fmt_float(v) for v in values.values()]
    try:
        params = dataclasses.replace(base.params, **{k: v for k, v in values.items()
                                                     if k in ("P", "A", "B", "C", "sigma_s")})
        h_star = values.get("h_star", base.h_star)
        phi_star = values.get("phi_star", base.phi_star)
        prolif = make_proliferation(h_star, phi_star)
        pot = base.potential()
        cert = check_dissipativity(params, pot, prolif)
        regime = homogeneous.classify_regime(params, prolif, pot)
        diverged = ""
        if cfg.action == "ode_trajectory":
            start = homogeneous.HomState(base.initial_params.get("phi0", 1.5),
                                         base.initial_params.get("sigma0", params.sigma_s))
            traj = homogeneous.integrate(start, base.t_end, base.scheme.dt, params, prolif)
            diverged = str(traj.diverged)
        elif cfg.action == "pde_run":
            if base.scheme.dt * params.C * h_star >= 1.0:
                raise ConfigurationError("dt*C*h_star >= 1 at this sweep point")
            sub = dataclasses.replace(base, params=params, h_star=h_star, phi_star=phi_star)
            report = dynamics.run(sub.initial_state(), sub.t_end, params, pot, prolif, sub.scheme)
            diverged = str(report.diverged)
        row += [regime.tag, str(cert.has_plateau_margin), str(cert.limit_below_one),
                str(cert.apoptosis_margin), str(cert.superquadratic), diverged, ""]
    except Exception as exc:  # per-point failures must not abort the sweep
        row += ["error", "", "", "", "", "", str(exc).replace(",", ";")]
    return row


def cmd_sweep(cfg: SweepConfig, threads: int) -> int:
    out = _ensure_out_dir(cfg.base)
    names = [axis.name for axis in cfg.axes]
    grids = [axis.values() for axis in cfg.axes]
    points: list[dict[str, float]] = []
    if len(grids) == 1:
        points = [{names[0]: v} for v in grids[0]]
    else:
        points = [{names[0]: v0, names[1]: v1} for v0 in grids[0] for v1 in grids[1]]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda pt: _sweep_point(cfg, pt), points))
    else:
        rows = [_sweep_point(cfg, pt) for pt in points]

    header = names + ["regime", "has_plateau_margin", "limit_below_one",
                      "apoptosis_margin", "superquadratic", "diverged", "error"]
    storage.write_regime_map_csv(out / "regime_map.csv", header, rows)
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        text = _load_text(args.config)
        if args.command == "sweep":
            sweep_cfg = parse_sweep_config(text)
            sweep_cfg.base = _apply_flags(sweep_cfg.base, args)
            return cmd_sweep(sweep_cfg, max(1, args.threads))
        cfg = _apply_flags(parse_run_config(text), args)
        if args.command == "check-params":
            return cmd_check_params(cfg)
        if args.command == "run":
            return cmd_run(cfg)
        return cmd_ode(cfg)
    except ConfigurationError as exc:
        print(f"chtumor: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"chtumor: solver failure: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"chtumor: I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
