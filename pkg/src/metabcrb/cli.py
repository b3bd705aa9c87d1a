"""Command line frontend.

    metabcrb sweep       bound along one scenario axis, one or more curves
    metabcrb validate    cross-check closed form / Schur blocks / dense / Monte Carlo
    metabcrb select      greedy subcarrier picks with the bound trajectory
    metabcrb asymptotics regime report: closed-form limits and scaling slopes

All numeric CSV fields use 17 significant digits so reruns are byte-identical.
METABCRB_THREADS caps the sweep worker pool (0 or unset = auto); results do
not depend on the thread count.

Exit codes: 0 ok, 1 usage or config error, 2 validation failure, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from .asymptotics import (corr_magsq_narrow_limit, corr_magsq_wide_limit,
                          fit_loglog_slope, slope_power_narrow_limit,
                          slope_power_wide_limit, wideband_slope_power_sum)
from .bcrb import (assemble_bfim, bcrb_closed_form, bcrb_from_blocks,
                   bcrb_from_dense, select_subcarriers)
from .config import (ConfigError, apply_override, parse_config,
                     scenario_from_settings)
from .expectations import corr_magsq, slope_power
from .mc import mc_bound
from .scenario import SubcarrierGrid, snr_to_noise
from .svg import write_line_chart

SWEEP_AXES = ("fwhm", "depth", "snr_db", "subcarrier_count", "kappa")
PAIR_RELTOL = 1e-9
Z_LIMIT = 4.0


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems must exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _fmt(value) -> str:
    if value is None:
        return ""
    return f"{value:.16e}"


def _write_csv(path: str, header: list[str], rows: list[list[str]]) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _worker_count() -> int:
    raw = os.environ.get("METABCRB_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"METABCRB_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ConfigError(f"METABCRB_THREADS must be >= 0, got {n}")
    if n == 0:
        return min(os.cpu_count() or 1, 8)
    return n


def _load_settings(path: str) -> dict:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    return parse_config(text)


def _svg_path(out: str) -> str:
    root, _ = os.path.splitext(out)
    return root + ".svg"


# ---------------------------------------------------------------- sweep

def _apply_axis(settings: dict, axis: str, value: float) -> dict:
    out = dict(settings)
    if axis == "fwhm":
        out["sensor.half_width"] = value / 2.0  # axis is the full width at half maximum
    elif axis == "depth":
        out["sensor.depth"] = value
    elif axis == "snr_db":
        out["noise.snr_db"] = value
    elif axis == "kappa":
        out["channel.kappa"] = value
    elif axis == "subcarrier_count":
        count = int(round(value))
        if count < 1 or count != value:
            raise ConfigError(f"subcarrier_count values must be positive integers, got {value}")
        out["grid.count"] = count
    else:
        raise ConfigError(f"unknown sweep axis {axis!r}")
    return out


def _sweep_values(args) -> list[float]:
    if args.values is not None:
        if args.start is not None or args.stop is not None or args.points is not None:
            raise ConfigError("--values cannot be combined with --start/--stop/--points")
        try:
            vals = [float(v) for v in args.values.split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad --values list: {exc}") from None
    else:
        if args.start is None or args.stop is None or args.points is None:
            raise ConfigError("provide --values or all of --start/--stop/--points")
        if args.points < 2:
            raise ConfigError("--points must be >= 2")
        if args.log:
            if args.start <= 0 or args.stop <= 0:
                raise ConfigError("--log needs positive --start/--stop")
            vals = list(np.geomspace(args.start, args.stop, args.points))
        else:
            vals = list(np.linspace(args.start, args.stop, args.points))
    if not vals:
        raise ConfigError("sweep needs at least one value")
    return vals


def cmd_sweep(args) -> int:
    settings = _load_settings(args.config)
    for assignment in args.set or []:
        settings = apply_override(settings, assignment)
    curves = []
    if args.curve:
        for spec in args.curve:
            cur = settings
            for assignment in spec.split(","):
                cur = apply_override(cur, assignment)
            curves.append((spec, cur))
    else:
        curves.append(("base", settings))
    values = _sweep_values(args)

    tasks = [(label, cur, value) for label, cur in curves for value in values]

    def run(task):
        label, cur, value = task
        scenario = scenario_from_settings(_apply_axis(cur, args.axis, value))
        res = bcrb_closed_form(scenario)
        return [f"{args.axis}", label, _fmt(value), _fmt(res.bound),
                _fmt(res.first_term), _fmt(res.prior_term), _fmt(res.coupling_term)]

    with ThreadPoolExecutor(max_workers=_worker_count()) as ex:
        rows = list(ex.map(run, tasks))

    header = ["axis", "curve_label", "axis_value", "bcrb",
              "first_term", "prior_term", "coupling_term"]
    _write_csv(args.out, header, rows)

    if args.svg:
        series = []
        for label, _ in curves:
            pts = [(float(r[2]), float(r[3])) for r in rows if r[1] == label]
            series.append((label, [p[0] for p in pts], [p[1] for p in pts]))
        write_line_chart(_svg_path(args.out), series, title=f"bound vs {args.axis}",
                         xlabel=args.axis, ylabel="bcrb",
                         xlog=args.axis == "fwhm", ylog=True)
    return 0


# ---------------------------------------------------------------- validate

def cmd_validate(args) -> int:
    settings = _load_settings(args.config)
    base = scenario_from_settings(settings)
    variants = [("configured", base)]
    if not base.channel.deterministic_los:
        rayleigh = apply_override(settings, "channel.kappa=0.0")
        variants.append(("rayleigh", scenario_from_settings(rayleigh)))
    los = apply_override(settings, "channel.los=true")
    variants.append(("det_los", scenario_from_settings(los)))

    header = ["scenario_label", "closed_form", "schur_from_blocks", "dense_inverse",
              "mc_estimate", "mc_std_err", "z_score"]
    rows = []
    failed = False
    for label, scenario in variants:
        closed = bcrb_closed_form(scenario).bound
        schur = dense = None
        if not scenario.channel.deterministic_los:
            blocks = assemble_bfim(scenario)
            schur = bcrb_from_blocks(blocks)
            if args.dense_check:
                if blocks.count > 64:
                    raise ConfigError("--dense-check supports at most 64 subcarriers")
                dense = bcrb_from_dense(blocks)
        est = mc_bound(scenario, args.samples, args.seed)
        diff = est.value - closed
        if est.std_err == 0.0:
            z = 0.0 if diff == 0.0 else math.inf
        else:
            z = diff / est.std_err
        rows.append([label, _fmt(closed), _fmt(schur), _fmt(dense),
                     _fmt(est.value), _fmt(est.std_err), _fmt(z)])
        if abs(z) > Z_LIMIT:
            failed = True
        for other in (schur, dense):
            if other is not None and abs(other - closed) > PAIR_RELTOL * abs(closed):
                failed = True
    _write_csv(args.out, header, rows)
    if args.svg:
        idx = list(range(len(rows)))
        write_line_chart(_svg_path(args.out), [
            ("closed_form", idx, [float(r[1]) for r in rows]),
            ("mc_estimate", idx, [float(r[4]) for r in rows]),
        ], title="bound cross-checks", xlabel="scenario index", ylabel="bound")
    return 2 if failed else 0


# ---------------------------------------------------------------- select

def cmd_select(args) -> int:
    settings = _load_settings(args.config)
    scenario = scenario_from_settings(settings)
    candidates = scenario.grid
    if not 1 <= args.budget <= candidates.count:
        raise ConfigError(f"--budget must be in [1, {candidates.count}]")
    chosen = select_subcarriers(candidates, scenario, args.budget)

    by_freq = dict(zip(
        candidates.frequencies,
        bcrb_closed_form(scenario.with_grid(candidates)).contributions,
    ))
    header = ["rank", "frequency", "contribution", "bcrb"]
    rows = []
    bounds = []
    for rank, freq in enumerate(chosen, start=1):
        grid = SubcarrierGrid.from_frequencies(sorted(chosen[:rank]))
        bound = bcrb_closed_form(scenario.with_grid(grid)).bound
        bounds.append(bound)
        rows.append([str(rank), _fmt(freq), _fmt(by_freq[freq]), _fmt(bound)])
    _write_csv(args.out, header, rows)
    if args.svg:
        write_line_chart(_svg_path(args.out),
                         [("greedy", list(range(1, len(bounds) + 1)), bounds)],
                         title="bound vs selected tones", xlabel="tones", ylabel="bcrb",
                         ylog=True)
    return 0


# ---------------------------------------------------------------- asymptotics

def _regime_sensor(sensor, prior, ratio):
    return replace(sensor, half_width=ratio * abs(sensor.shift_rate) * prior.std)


def cmd_asymptotics(args) -> int:
    settings = _load_settings(args.config)
    base = scenario_from_settings(settings)
    sensor, prior = base.sensor, base.prior
    sweep = abs(sensor.shift_rate) * prior.std
    center = sensor.resonance(prior.mean)

    checks = []  # (name, predicted, computed, deviation, tolerance)

    for ratio, tag, tol_sp, tol_corr in ((100.0, "wide", 1e-3, 5e-3), (1e-3, "narrow", 2e-2, 2e-2)):
        s = _regime_sensor(sensor, prior, ratio)
        offsets = (0.0, 0.5 * (s.half_width if tag == "wide" else sweep))
        for delta in offsets:
            f = center + delta
            sp = slope_power(s, f, prior)
            cm = corr_magsq(s, f, prior)
            if tag == "wide":
                sp_lim = slope_power_wide_limit(s, delta)
                cm_lim = corr_magsq_wide_limit(s, delta)
            else:
                sp_lim = slope_power_narrow_limit(s, prior, delta)
                cm_lim = corr_magsq_narrow_limit(s, prior, delta)
            checks.append((f"slope_power_{tag}_offset={delta:g}", sp_lim, sp,
                           abs(sp - sp_lim) / sp_lim, tol_sp))
            if cm_lim > 0:
                checks.append((f"corr_magsq_{tag}_offset={delta:g}", cm_lim, cm,
                               abs(cm - cm_lim) / cm_lim, tol_corr))

    grid = SubcarrierGrid.uniform(center=center, spacing=sensor.half_width / 100.0, count=10000)
    total = float(np.sum(slope_power(sensor, grid.as_array(), prior)))
    predicted = wideband_slope_power_sum(sensor, grid, prior)
    checks.append(("wideband_slope_power_sum", predicted, total,
                   abs(total - predicted) / predicted, 5e-2))

    def bound_at(sensor_v, depth=None, snr_db=70.0):
        s = sensor_v if depth is None else replace(sensor_v, absorption_depth=depth)
        sc = base.with_channel(type(base.channel)(kappa=0.0)).with_noise(snr_to_noise(snr_db))
        sc = sc.with_grid(SubcarrierGrid.uniform(center=center, spacing=1.0, count=1))
        return bcrb_closed_form(replace(sc, sensor=s)).bound

    # quadratic growth with the half-width once the dip dwarfs the prior sweep;
    # needs the likelihood term dominant, hence the high reference SNR
    ratios = np.geomspace(10.0, 100.0, 9)
    slope_wide = fit_loglog_slope(ratios, [bound_at(_regime_sensor(sensor, prior, r)) for r in ratios])
    checks.append(("bound_halfwidth_slope_wide", 2.0, slope_wide, abs(slope_wide - 2.0), 0.1))

    ratios = np.geomspace(1e-3, 1e-2, 9)
    slope_narrow = fit_loglog_slope(ratios, [bound_at(_regime_sensor(sensor, prior, r), snr_db=30.0)
                                             for r in ratios])
    checks.append(("bound_halfwidth_slope_narrow", 1.0, slope_narrow, abs(slope_narrow - 1.0), 0.1))

    depths = np.linspace(0.2, 1.0, 9)
    wide_sensor = _regime_sensor(sensor, prior, 10.0)
    slope_depth = fit_loglog_slope(depths, [bound_at(wide_sensor, depth=d) for d in depths])
    checks.append(("bound_depth_slope_wide", -2.0, slope_depth, abs(slope_depth + 2.0), 0.15))

    header = ["check", "predicted", "computed", "deviation", "tolerance", "status"]
    rows = []
    failed = False
    for name, predicted, computed, deviation, tol in checks:
        ok = deviation <= tol
        failed = failed or not ok
        rows.append([name, _fmt(predicted), _fmt(computed), _fmt(deviation),
                     _fmt(tol), "ok" if ok else "fail"])
    _write_csv(args.out, header, rows)
    if args.svg:
        idx = list(range(len(checks)))
        write_line_chart(_svg_path(args.out), [
            ("deviation", idx, [max(c[3], 1e-18) for c in checks]),
            ("tolerance", idx, [c[4] for c in checks]),
        ], title="asymptotic checks", xlabel="check index", ylabel="deviation", ylog=True)
    return 3 if failed else 0


# ---------------------------------------------------------------- wiring

def build_parser() -> _Parser:
    parser = _Parser(prog="metabcrb", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--config", required=True, help="scenario config file (key=value lines)")
        p.add_argument("--out", required=True, help="output CSV path")
        p.add_argument("--svg", action="store_true", help="also write a chart next to the CSV")

    p = sub.add_parser("sweep", help="bound along one scenario axis")
    common(p)
    p.add_argument("--axis", required=True, choices=SWEEP_AXES)
    p.add_argument("--values", help="comma-separated axis values")
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--log", action="store_true", help="geometric value spacing")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a config entry (repeatable)")
    p.add_argument("--curve", action="append", metavar="KEY=VALUE[,KEY=VALUE]",
                   help="add a labeled curve with these overrides (repeatable)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="cross-check the bound computations")
    common(p)
    p.add_argument("--samples", type=int, default=100_000, help="Monte Carlo draws")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dense-check", action="store_true",
                   help="also invert the dense information matrix (grids up to 64 tones)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("select", help="greedy subcarrier selection")
    common(p)
    p.add_argument("--budget", type=int, required=True, help="number of tones to pick")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("asymptotics", help="regime limits and scaling slopes")
    common(p)
    p.set_defaults(func=cmd_asymptotics)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 1
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except ArithmeticError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
