"""Command-line front end: band computation, simulation, validation.

Outputs are plain CSV/JSON (plus optional dependency-free SVG polyline
plots); every run writes its fully resolved configuration next to its
outputs, and identical configurations reproduce identical files.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .kdv import coeffs_from_band
from .lattice import build_lattice
from .operators import SolverError, assemble_operators
from .sim import init_from_kdv_ansatz, simulate, write_snapshot
from .spectral import (
    MODE_AMPLITUDE,
    SpectralError,
    band_curve,
    band_solve,
    beta_quadratic_limit,
    mu_derivatives_at_zero,
    first_band_mu,
)
from .validation import (
    DEFAULT_LADDER,
    DEFAULT_T0,
    SLOPE_WINDOWS,
    ValidationError,
    convergence_ladder,
    make_coeffs,
    sech2_profile,
    sized_cells,
)

EXIT_OK = 0
EXIT_FAIL = 1          # validation ran but did not pass
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_IO = 4


def _write_svg(path: Path, series: list[tuple[np.ndarray, np.ndarray, str]],
               width: int = 640, height: int = 480, title: str = "") -> None:
    """Minimal polyline plot: each series is (x, y, color)."""
    pad = 50
    xs = np.concatenate([s[0] for s in series])
    ys = np.concatenate([s[1] for s in series])
    x0, x1 = float(np.min(xs)), float(np.max(xs))
    y0, y1 = float(np.min(ys)), float(np.max(ys))
    sx = (width - 2 * pad) / ((x1 - x0) or 1.0)
    sy = (height - 2 * pad) / ((y1 - y0) or 1.0)
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width // 2}" y="20" text-anchor="middle">{title}</text>',
    ]
    for x, y, color in series:
        pts = " ".join(
            f"{pad + (xi - x0) * sx:.2f},{height - pad - (yi - y0) * sy:.2f}"
            for xi, yi in zip(x, y)
        )
        lines.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
    lines.append("</svg>")
    path.write_text("\n".join(lines))


def _out_dir(arg: str) -> Path:
    path = Path(arg)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_config(out: Path, cfg: dict) -> None:
    (out / "config.json").write_text(json.dumps(cfg, indent=2, sort_keys=True, default=float))


def _load_config_defaults(subparsers: dict, argv) -> None:
    """Pre-scan for --config and fold its JSON keys in as subcommand defaults
    (explicit flags still win)."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        cfg = json.loads(Path(known.config).read_text())
        defaults = {k.replace("-", "_"): v for k, v in cfg.items()}
        for sp in subparsers.values():
            sp.set_defaults(**defaults)


# ---------------------------------------------------------------------------
# bands


def cmd_bands(args) -> int:
    if args.l_samples < 2 or args.bands < 1:
        print("bands: need --l-samples >= 2 and --bands >= 1", file=sys.stderr)
        return EXIT_CONFIG
    out = _out_dir(args.out)

    rows = []
    for band in range(1, args.bands + 1):
        ls = np.linspace(-0.5, 0.5, args.l_samples)
        for l in ls:
            p = band_solve(float(l), band)
            rows.append((p.l, p.band, p.lam, p.mu, p.omega, -p.omega))
    with open(out / "bands.csv", "w") as fh:
        fh.write("l,band,lambda,mu,omega_plus,omega_minus\n")
        for r in rows:
            fh.write(f"{r[0]:.16g},{r[1]},{r[2]:.16g},{r[3]:.16g},{r[4]:.16g},{r[5]:.16g}\n")

    d2, d4 = mu_derivatives_at_zero(first_band_mu)
    analytic = coeffs_from_band(d2, d4, "analytic")
    measured = coeffs_from_band(d2, d4, "measured_beta")
    beta_limit = beta_quadratic_limit(m=args.beta_m) if args.beta else None
    derivs = {
        "d2_mu0": d2,
        "d4_mu0": d4,
        "c": analytic.c,
        "nu1": analytic.nu1,
        "nu2_analytic": analytic.nu2,
        "nu2_measured": measured.nu2,
        "mode_amplitude": MODE_AMPLITUDE,
        "beta_limit_measured": beta_limit,
    }
    (out / "band_derivs.json").write_text(json.dumps(derivs, indent=2))

    if args.svg:
        curve = band_curve(args.l_samples, band=1)
        _write_svg(
            out / "bands.svg",
            [(curve.l, curve.omega, "steelblue"), (curve.l, -curve.omega, "firebrick")],
            title="lowest dispersion branch: l vs +/- omega",
        )
    _write_config(out, {"command": "bands", "l_samples": args.l_samples,
                        "bands": args.bands, "beta": args.beta, "beta_m": args.beta_m,
                        "version": __version__})
    print(f"bands: wrote {len(rows)} rows to {out / 'bands.csv'}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(args) -> int:
    try:
        coeffs = make_coeffs(args.mode, "measured_beta")
        n_cells = args.n_cells or sized_cells(args.epsilon, args.t0, coeffs.c)
        lat = build_lattice(n_cells, args.m, args.mode)
    except ValueError as exc:
        print(f"simulate: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = _out_dir(args.out)

    def profile(x):
        return args.amplitude * sech2_profile(x)

    try:
        ops = assemble_operators(lat)
        if args.amplitude == 0.0:
            initial = simulate(ops, init_from_kdv_ansatz(lat, profile, args.epsilon), [0.0], args.dt)[0]
        else:
            initial = init_from_kdv_ansatz(lat, profile, args.epsilon)
        t_max = args.t0 / args.epsilon**3
        times = np.linspace(0.0, t_max, args.snapshots)
        states = simulate(ops, initial, times, args.dt, nonlinear=not args.linear)
    except (SolverError, SpectralError) as exc:
        print(f"simulate: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    try:
        for i, st in enumerate(states):
            write_snapshot(st.u, out / f"snapshot_{i:04d}.bin", time=st.t, epsilon=args.epsilon)
        meta = {
            "epsilon": args.epsilon, "t0": args.t0, "t_max": t_max,
            "n_cells": n_cells, "m": args.m, "mode": args.mode,
            "dt": args.dt, "snapshots": args.snapshots,
            "nonlinear": not args.linear, "amplitude": args.amplitude,
        }
        (out / "sim_meta.json").write_text(json.dumps(meta, indent=2))
        _write_config(out, {"command": "simulate", **meta, "version": __version__})
    except OSError as exc:
        print(f"simulate: io error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"simulate: wrote {len(states)} snapshots to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# validate


def cmd_validate(args) -> int:
    try:
        epsilons = [float(e) for e in args.eps.split(",")]
    except ValueError:
        print(f"validate: bad --eps list {args.eps!r}", file=sys.stderr)
        return EXIT_CONFIG
    if args.mode not in SLOPE_WINDOWS:
        print(f"validate: unknown mode {args.mode!r}", file=sys.stderr)
        return EXIT_CONFIG
    norms = {"analytic": ["analytic"], "measured": ["measured_beta"],
             "both": ["analytic", "measured_beta"]}.get(args.coeffs)
    if norms is None:
        print(f"validate: --coeffs must be analytic|measured|both, got {args.coeffs!r}",
              file=sys.stderr)
        return EXIT_CONFIG
    out = _out_dir(args.out)
    lo, hi = SLOPE_WINDOWS[args.mode]

    results = {}
    fit_ok = len(epsilons) >= 3
    passing = []
    try:
        for norm in norms:
            if fit_ok:
                fit = convergence_ladder(epsilons, t0=args.t0, mode=args.mode,
                                         normalization=norm, m=args.m, dt=args.dt)
                reports = fit.reports
                ok = (not fit.poisoned) and fit.monotone and lo <= fit.slope <= hi
            else:
                from .validation import run_comparison
                reports = [run_comparison(e, t0=args.t0, mode=args.mode,
                                          normalization=norm, m=args.m, dt=args.dt)
                           for e in epsilons]
                fit, ok = None, False
            if ok:
                passing.append(norm)
            results[norm] = (fit, reports)
            for rep in reports:
                with open(out / f"error_series_{norm}_{rep.epsilon:g}.csv", "w") as fh:
                    fh.write("t,sup_error\n")
                    for t, e in zip(rep.times, rep.sup_error):
                        fh.write(f"{t:.16g},{e:.16g}\n")
    except (ValidationError, SolverError, SpectralError) as exc:
        print(f"validate: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    overall = bool(passing)
    report = {
        "mode": args.mode,
        "coeff_choice": args.coeffs,
        "passing_normalizations": passing,
        "thresholds": {"slope_min": lo, "slope_max": hi},
        "pass": overall,
        "results": {},
    }
    for norm, (fit, reports) in results.items():
        report["results"][norm] = {
            "ladder": [
                {"epsilon": r.epsilon, "max_sup_error": r.max_sup_error,
                 "t_max": r.t0 / r.epsilon**3, "wall_s": round(r.wall_s, 3),
                 "wrap_ok": r.wrap_ok, "continuity_ok": r.continuity_ok,
                 "fingerprint": r.fingerprint}
                for r in reports
            ],
            "slope": None if fit is None else fit.slope,
            "intercept": None if fit is None else fit.intercept,
            "monotone": None if fit is None else fit.monotone,
            "poisoned": None if fit is None else fit.poisoned,
        }
    if not fit_ok:
        report["note"] = "fewer than 3 epsilon values: fit refused, errors reported only"
    (out / "report.json").write_text(json.dumps(report, indent=2))
    _write_config(out, {"command": "validate", "eps": epsilons, "t0": args.t0,
                        "mode": args.mode, "coeffs": args.coeffs, "m": args.m,
                        "dt": args.dt, "version": __version__})

    if args.svg and fit_ok:
        series = []
        colors = {"analytic": "firebrick", "measured_beta": "steelblue"}
        for norm, (fit, _) in results.items():
            if fit is not None:
                series.append((np.log10(fit.epsilons), np.log10(fit.errors), colors[norm]))
        if series:
            _write_svg(out / "ladder.svg", series, title="log10 eps vs log10 sup error")

    for norm, (fit, _) in results.items():
        slope = "n/a" if fit is None else f"{fit.slope:.3f}"
        print(f"validate[{args.mode}/{norm}]: slope {slope} "
              f"(window [{lo}, {hi}]) -> {'pass' if norm in passing else 'fail'}")
    return EXIT_OK if overall else EXIT_FAIL


# ---------------------------------------------------------------------------


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(
        prog="graphkdv",
        description="Band structure, wave simulation and long-wave validation "
                    "on the periodic necklace graph.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bands", help="compute dispersion bands and derived coefficients")
    p.add_argument("--config", help="JSON config file (flags override)")
    p.add_argument("--l-samples", type=int, default=101)
    p.add_argument("--bands", type=int, default=1)
    p.add_argument("--beta", action=argparse.BooleanOptionalAction, default=True,
                   help="also measure the quadratic coupling limit")
    p.add_argument("--beta-m", type=int, default=80)
    p.add_argument("--svg", action="store_true")
    p.add_argument("--out", default="bands_out")
    p.set_defaults(func=cmd_bands)

    p = sub.add_parser("simulate", help="integrate the lattice wave equation")
    p.add_argument("--config", help="JSON config file (flags override)")
    p.add_argument("--epsilon", type=float, default=0.25)
    p.add_argument("--t0", type=float, default=DEFAULT_T0)
    p.add_argument("--dt", type=float, default=0.02)
    p.add_argument("--n-cells", type=int, default=0, help="0 = auto-size (no wrap)")
    p.add_argument("--m", type=int, default=40)
    p.add_argument("--mode", choices=("full", "symmetric", "line"), default="symmetric")
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--snapshots", type=int, default=5)
    p.add_argument("--linear", action="store_true", help="drop the nonlinear term")
    p.add_argument("--out", default="sim_out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="run the epsilon-ladder error experiment")
    p.add_argument("--config", help="JSON config file (flags override)")
    p.add_argument("--eps", default=",".join(str(e) for e in DEFAULT_LADDER))
    p.add_argument("--t0", type=float, default=DEFAULT_T0)
    p.add_argument("--mode", choices=("full", "symmetric", "line"), default="symmetric")
    p.add_argument("--coeffs", choices=("analytic", "measured", "both"), default="both")
    p.add_argument("--m", type=int, default=40)
    p.add_argument("--dt", type=float, default=0.02)
    p.add_argument("--svg", action="store_true")
    p.add_argument("--out", default="validate_out")
    p.set_defaults(func=cmd_validate)

    subparsers = dict(sub.choices)
    return parser, subparsers


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser, subparsers = build_parser()
    try:
        _load_config_defaults(subparsers, argv)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"bad config file: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
