"""Command-line front end.

Commands: ``run`` (evolve a shape and write snapshots + diagnostics),
``converge`` (temporal convergence study), ``metric`` (distance between two
snapshot files), ``shapes`` (catalog listing), ``cpu-compare`` (cost table).

Option values resolve with precedence file < environment < flags: a JSON
config file passed via ``--config`` seeds the options, any environment
variable ``GEOMFLOW_<OPTION>`` overrides the file, and explicit flags
override both.  Numeric options accept decimals and exact ``p/q`` rationals.

Exit codes: 0 success, 2 configuration or parse error, 3 solver failure
(the message names the failing step), 4 metric misuse.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__, geometry, harness
from .errors import (ClippingFailure, ConfigError, GeomflowError, SizeMismatch,
                     StepFailure)
from .geometry import make_shape
from .metrics import MetricKind, metric_fn
from .schemes import FlowKind, InitMode, Scheme, SchemeConfig, run

ENV_PREFIX = "GEOMFLOW_"


def parse_number(text) -> float:
    """Parse a decimal or an exact p/q rational into a float."""
    if isinstance(text, (int, float)):
        return float(text)
    try:
        return float(Fraction(str(text).strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse number {text!r}: {exc}") from None


def parse_shape(text: str) -> geometry.ShapeSpec:
    """Parse 'name' or 'name:p1,p2' into a catalog shape."""
    name, _, params = str(text).partition(":")
    values = [parse_number(p) for p in params.split(",") if p.strip()] if params else []
    try:
        return make_shape(name.strip().lower(), values)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


class _Options:
    """Option values merged from config file, environment, and flags."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.file_cfg = {}
        config_path = getattr(args, "config", None) or os.environ.get(ENV_PREFIX + "CONFIG")
        if config_path:
            try:
                with open(config_path) as fh:
                    self.file_cfg = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config file {config_path}: {exc}") from None
        self.resolved = {}

    def get(self, name, default=None, cast=None, required=False):
        value = getattr(self.args, name, None)
        if value is None:
            value = os.environ.get(ENV_PREFIX + name.upper())
        if value is None:
            value = self.file_cfg.get(name)
        if value is None:
            value = default
        if value is None and required:
            raise ConfigError(f"missing required option --{name.replace('_', '-')}")
        if value is not None and cast is not None:
            value = cast(value)
        self.resolved[name] = value
        return value


def _parse_time_list(text):
    if not text:
        return []
    if isinstance(text, (list, tuple)):
        return [parse_number(t) for t in text]
    return [parse_number(t) for t in str(text).split(",") if t.strip()]


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

def cmd_run(args) -> int:
    opts = _Options(args)
    flow = FlowKind(opts.get("flow", required=True, cast=str))
    shape_text = opts.get("shape", required=True, cast=str)
    shape = parse_shape(shape_text)
    cfg = SchemeConfig(
        flow=flow,
        tau=opts.get("tau", required=True, cast=parse_number),
        t_end=opts.get("t_end", required=True, cast=parse_number),
        n=opts.get("n", default=128, cast=lambda v: int(parse_number(v))),
        n_mr=opts.get("n_mr", default=10.0, cast=parse_number),
        init_mode=InitMode(opts.get("init", default=InitMode.KAPPA_FORMULA.value, cast=str)))
    scheme = Scheme(opts.get("scheme", default=Scheme.BGN2.value, cast=str))
    out_dir = Path(opts.get("out_dir", default=".", cast=str))
    fmt = opts.get("snapshot_format", default="csv", cast=str)
    if fmt not in ("csv", "json"):
        raise ConfigError(f"snapshot format must be csv or json, got {fmt!r}")
    snap_times = _parse_time_list(opts.get("snapshot_times", default=""))

    total = cfg.step_count()
    wanted = {}
    for t in snap_times:
        step = int(round(t / cfg.tau))
        if step < 0 or step > total or abs(step * cfg.tau - t) > 1e-9 * max(1.0, cfg.t_end):
            raise ConfigError(f"snapshot time {t!r} is not a step multiple within [0, t_end]")
        wanted[step] = t
    wanted[total] = cfg.t_end

    out_dir.mkdir(parents=True, exist_ok=True)
    save = geometry.save_snapshot_csv if fmt == "csv" else geometry.save_snapshot_json
    outputs = []

    def snapshot_observer(record, curve, kappa):
        if record.step in wanted:
            path = out_dir / f"snapshot_step{record.step:06d}.{fmt}"
            save(path, curve, record.time)
            outputs.append(str(path))

    result = run(shape, cfg, observers=[snapshot_observer], scheme=scheme)

    diag_path = out_dir / "diagnostics.csv"
    harness.write_diagnostics_csv(harness.diagnostics_series(result), diag_path)
    outputs.append(str(diag_path))

    manifest = {
        "version": __version__,
        "config": {
            "flow": flow.value, "shape": shape_text, "tau": cfg.tau,
            "t_end": cfg.t_end, "n": cfg.n, "n_mr": cfg.n_mr,
            "init": cfg.init_mode.value, "scheme": scheme.value,
            "snapshot_times": snap_times, "snapshot_format": fmt,
        },
        "realized": {
            "steps": total, "final_time": total * cfg.tau,
            "mr_events": [[m, before, after] for m, before, after in result.mr_events],
        },
        "outputs": outputs,
    }
    manifest_path = out_dir / "manifest.json"
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2)
    print(f"run complete: {total} steps, {len(result.mr_events)} mesh regularizations")
    for path in outputs + [str(manifest_path)]:
        print(f"  wrote {path}")
    return 0


# ---------------------------------------------------------------------------
# converge
# ---------------------------------------------------------------------------

def cmd_converge(args) -> int:
    opts = _Options(args)
    flow = FlowKind(opts.get("flow", required=True, cast=str))
    shape_text = opts.get("shape", required=True, cast=str)
    shape = parse_shape(shape_text)
    scheme = Scheme(opts.get("scheme", default=Scheme.BGN2.value, cast=str))
    metric = MetricKind(opts.get("metric", default=MetricKind.MANIFOLD.value, cast=str))
    paper_scale = bool(opts.get("paper_scale", default=False))
    tau0 = opts.get("tau0", default=1.0 / 40.0, cast=parse_number)
    levels = opts.get("levels", default=4, cast=lambda v: int(parse_number(v)))
    t_end = opts.get("t_end", default=0.25, cast=parse_number)
    init = InitMode(opts.get("init", default=InitMode.KAPPA_FORMULA.value, cast=str))
    if paper_scale:
        n = opts.get("n", default=harness.PAPER_N, cast=lambda v: int(parse_number(v)))
        tau_ref = harness.PAPER_TAU_REF
    else:
        n = opts.get("n", default=harness.DESK_N_REF, cast=lambda v: int(parse_number(v)))
        tau_ref = None
    out_dir = Path(opts.get("out_dir", default=".", cast=str))
    cache = opts.get("cache_dir", default=None)

    report = harness.convergence_study(
        shape, flow, scheme, metric, tau0, levels, n, t_end,
        tau_ref=tau_ref, cache=cache, init_mode=init)

    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"converge_{report.shape}_{report.flow}_{report.scheme}_{report.metric.value}"
    csv_path = out_dir / f"{stem}.csv"
    json_path = out_dir / f"{stem}.json"
    harness.write_convergence_csv(report, csv_path)
    harness.write_convergence_json(report, json_path)

    print(f"{'tau':>14} {'error':>14} {'order':>8} {'seconds':>9}")
    for i, (tau, err, sec) in enumerate(zip(report.taus, report.errors, report.runtimes)):
        order = "--" if i == 0 else f"{report.orders[i - 1]:.2f}"
        print(f"{tau:14.6g} {err:14.6g} {order:>8} {sec:9.3f}")
    if report.partial:
        print("warning: report is partial:", "; ".join(report.failures))
    print(f"wrote {csv_path}\nwrote {json_path}")
    return 0


# ---------------------------------------------------------------------------
# metric
# ---------------------------------------------------------------------------

def _load_snapshot(path: str):
    try:
        if str(path).endswith(".json"):
            curve, _ = geometry.load_snapshot_json(path)
        else:
            curve, _ = geometry.load_snapshot_csv(path)
        return curve
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot load snapshot {path}: {exc}") from None


def cmd_metric(args) -> int:
    opts = _Options(args)
    kind = MetricKind(opts.get("kind", default=MetricKind.MANIFOLD.value, cast=str))
    a = _load_snapshot(args.file_a)
    b = _load_snapshot(args.file_b)
    value = metric_fn(kind)(a, b)
    print(f"{value:.17g}")
    return 0


# ---------------------------------------------------------------------------
# shapes / cpu-compare
# ---------------------------------------------------------------------------

def cmd_shapes(args) -> int:
    print("shape catalog (name[:params]):")
    print("  circle[:radius]        default radius 1")
    print("  ellipse[:a,b]          default semi-axes 2, 1")
    print("  tube[:length,radius]   default 4 x 1 rectangle with radius-0.5 caps")
    print("  flower                 r(theta) = 2 + cos(6 theta)")
    print("  nonconvex              nonconvex benchmark curve")
    return 0


def cmd_cpu_compare(args) -> int:
    opts = _Options(args)
    flow = FlowKind(opts.get("flow", required=True, cast=str))
    shape = parse_shape(opts.get("shape", required=True, cast=str))
    ns = [int(parse_number(v)) for v in str(opts.get("n_list", default="320,640,1280")).split(",")]
    t_end = opts.get("t_end", default=0.05, cast=parse_number)
    schemes = [Scheme(s.strip()) for s in
               str(opts.get("schemes", default="bgn1,bgn2")).split(",")]
    out_dir = Path(opts.get("out_dir", default=".", cast=str))
    cache = opts.get("cache_dir", default=None)
    init = InitMode(opts.get("init", default=InitMode.KAPPA_FORMULA.value, cast=str))

    rows = harness.cpu_comparison(shape, flow, ns, t_end, schemes,
                                  cache=cache, init_mode=init)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"cpu_{shape.cache_key()}_{flow.value}.csv"
    harness.write_cpu_csv(rows, path)
    print(f"{'scheme':>7} {'N':>6} {'E_M':>12} {'E_H':>12} {'seconds':>9}")
    for r in rows:
        print(f"{r.scheme:>7} {r.n:6d} {r.e_manifold:12.4g} {r.e_hausdorff:12.4g} {r.seconds:9.3f}")
    print(f"wrote {path}")
    return 0


# ---------------------------------------------------------------------------
# parser / entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geomflow",
        description="Geometric flows of closed planar curves (first-order and "
                    "leap-frog parametric FEM schemes).",
        epilog="Option precedence: config file < GEOMFLOW_* environment < flags. "
               f"The reference cache directory comes from ${harness.CACHE_ENV_VAR}.")
    parser.add_argument("--version", action="version", version=f"geomflow {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON file with option defaults")
        p.add_argument("--cache-dir", dest="cache_dir", help="reference cache directory")

    p_run = sub.add_parser("run", help="evolve a shape and write snapshots + diagnostics")
    common(p_run)
    p_run.add_argument("--flow", choices=[f.value for f in FlowKind])
    p_run.add_argument("--shape", help="catalog shape, e.g. ellipse:2,1")
    p_run.add_argument("--n", help="vertex count")
    p_run.add_argument("--tau", help="time step (decimal or p/q)")
    p_run.add_argument("--t-end", dest="t_end", help="final time")
    p_run.add_argument("--n-mr", dest="n_mr", help="mesh-ratio threshold (default 10)")
    p_run.add_argument("--init", choices=[m.value for m in InitMode])
    p_run.add_argument("--scheme", choices=[s.value for s in Scheme])
    p_run.add_argument("--snapshot-times", dest="snapshot_times",
                       help="comma-separated times (step multiples)")
    p_run.add_argument("--snapshot-format", dest="snapshot_format", choices=["csv", "json"])
    p_run.add_argument("--out-dir", dest="out_dir")
    p_run.set_defaults(func=cmd_run)

    p_conv = sub.add_parser("converge", help="temporal convergence study")
    common(p_conv)
    p_conv.add_argument("--flow", choices=[f.value for f in FlowKind])
    p_conv.add_argument("--shape")
    p_conv.add_argument("--scheme", choices=[s.value for s in Scheme])
    p_conv.add_argument("--metric", choices=[m.value for m in MetricKind])
    p_conv.add_argument("--tau0", help="coarsest step of the ladder (default 1/40)")
    p_conv.add_argument("--levels", help="ladder depth (default 4)")
    p_conv.add_argument("--n", help="vertex count (default 2000)")
    p_conv.add_argument("--t-end", dest="t_end", help="final time (default 0.25)")
    p_conv.add_argument("--init", choices=[m.value for m in InitMode])
    p_conv.add_argument("--paper-scale", dest="paper_scale", action="store_const", const=True,
                        help="use N=10000 and the original tiny reference step")
    p_conv.add_argument("--out-dir", dest="out_dir")
    p_conv.set_defaults(func=cmd_converge)

    p_metric = sub.add_parser("metric", help="distance between two snapshot files")
    common(p_metric)
    p_metric.add_argument("file_a")
    p_metric.add_argument("file_b")
    p_metric.add_argument("--kind", choices=[m.value for m in MetricKind])
    p_metric.set_defaults(func=cmd_metric)

    p_shapes = sub.add_parser("shapes", help="list the shape catalog")
    p_shapes.set_defaults(func=cmd_shapes)

    p_cpu = sub.add_parser("cpu-compare", help="cost/accuracy table over an N ladder")
    common(p_cpu)
    p_cpu.add_argument("--flow", choices=[f.value for f in FlowKind])
    p_cpu.add_argument("--shape")
    p_cpu.add_argument("--n-list", dest="n_list", help="comma-separated N ladder")
    p_cpu.add_argument("--t-end", dest="t_end", help="final time (default 0.05)")
    p_cpu.add_argument("--schemes", help="comma-separated schemes (default bgn1,bgn2)")
    p_cpu.add_argument("--init", choices=[m.value for m in InitMode])
    p_cpu.add_argument("--out-dir", dest="out_dir")
    p_cpu.set_defaults(func=cmd_cpu_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "cache_dir", None):
        os.environ[harness.CACHE_ENV_VAR] = args.cache_dir
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except StepFailure as exc:
        print(f"solver failure at step {exc.step_index}: {exc.cause}", file=sys.stderr)
        return 3
    except SizeMismatch as exc:
        print(f"metric misuse: {exc}", file=sys.stderr)
        return 4
    except ClippingFailure as exc:
        print(f"metric failure: {exc}", file=sys.stderr)
        return 4
    except GeomflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
