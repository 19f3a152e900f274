"""Experiment orchestration: convergence ladders, reference solutions,
geometric diagnostics, and CPU-cost comparisons.

A temporal convergence study runs the same problem over a tau-halving ladder
at fixed (large) N and measures each final curve against a reference curve
with one of the four metrics; the observed order between consecutive levels
is ``log2(E_tau / E_{tau/2})``.  References are either exact (shrinking
circle under curve-shortening flow) or computed once with the leap-frog
scheme at a much smaller step size and persisted in the snapshot cache.

Desk-scale defaults keep every shipped study in the minutes range; the
original larger parameters (N = 10000, tau_ref = 0.1 * 2^-11) remain
available through the CLI's ``--paper-scale`` flag.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import geometry
from .errors import ConfigError, StepFailure
from .geometry import Circle, PolygonalCurve, ShapeSpec
from .metrics import MetricKind, metric_fn
from .schemes import (FlowKind, InitMode, RunResult, Scheme, SchemeConfig,
                      StepRecord, run)

#: default vertex count of computed references at desk scale
DESK_N_REF = 2000
#: paper-scale parameters (behind the CLI --paper-scale flag)
PAPER_N = 10000
PAPER_TAU_REF = 0.1 * 2.0 ** -11

CACHE_ENV_VAR = "GEOMFLOW_CACHE_DIR"


def cache_dir(explicit=None) -> Path:
    """Reference-cache directory: explicit argument, else $GEOMFLOW_CACHE_DIR,
    else ~/.cache/geomflow."""
    if explicit is not None:
        path = Path(explicit)
    elif os.environ.get(CACHE_ENV_VAR):
        path = Path(os.environ[CACHE_ENV_VAR])
    else:
        path = Path.home() / ".cache" / "geomflow"
    path.mkdir(parents=True, exist_ok=True)
    return path


# ---------------------------------------------------------------------------
# Reference solutions
# ---------------------------------------------------------------------------

def exact_csf_circle(radius: float, t: float, n: int) -> PolygonalCurve:
    """The shrinking circle R(t) = sqrt(R0^2 - 2t), sampled with n vertices
    phase-aligned with the initial sampling."""
    rsq = radius * radius - 2.0 * t
    if rsq <= 0.0:
        raise ConfigError(f"circle of radius {radius} is extinct at t = {t}")
    return geometry.equidistributed_sample(Circle(math.sqrt(rsq)), n)


def has_exact_reference(shape: ShapeSpec, flow: FlowKind) -> bool:
    return isinstance(shape, Circle) and FlowKind(flow) is FlowKind.CSF


def reference_solution(shape: ShapeSpec, flow: FlowKind, n_ref: int, tau_ref: float,
                       t_end: float, cache=None,
                       init_mode: InitMode = InitMode.KAPPA_FORMULA) -> PolygonalCurve:
    """Reference curve at exactly t = t_end.

    Curve-shortening flow started from a circle has a closed-form solution
    and bypasses computation entirely.  All other references are computed by
    the leap-frog scheme at (n_ref, tau_ref) and persisted in the snapshot
    cache keyed by (shape, flow, n_ref, tau_ref, t_end); a cache hit
    reproduces the stored curve bit for bit.
    """
    flow = FlowKind(flow)
    if has_exact_reference(shape, flow):
        return exact_csf_circle(shape.radius, t_end, n_ref)
    key = (f"{shape.cache_key()}_{flow.value}_bgn2_N{n_ref}"
           f"_tau{tau_ref!r}_T{t_end!r}_{InitMode(init_mode).value}.csv")
    path = cache_dir(cache) / key
    if path.exists():
        curve, _ = geometry.load_snapshot_csv(path)
        return curve
    cfg = SchemeConfig(flow=flow, tau=tau_ref, t_end=t_end, n=n_ref, init_mode=init_mode)
    result = run(shape, cfg, scheme=Scheme.BGN2)
    curve = result.state.curr_curve
    geometry.save_snapshot_csv(path, curve, t_end)
    return curve


# ---------------------------------------------------------------------------
# Convergence studies
# ---------------------------------------------------------------------------

@dataclass
class ConvergenceReport:
    """Errors and observed orders over a tau-halving ladder."""

    metric: MetricKind
    taus: List[float]
    errors: List[float]
    orders: List[float]          # one fewer than errors
    runtimes: List[float]        # wall-clock seconds per level, runs only
    shape: str = ""
    flow: str = ""
    scheme: str = ""
    n: int = 0
    t_end: float = 0.0
    partial: bool = False
    failures: List[str] = field(default_factory=list)

    def as_dict(self):
        return {
            "metric": self.metric.value, "shape": self.shape, "flow": self.flow,
            "scheme": self.scheme, "n": self.n, "t_end": self.t_end,
            "taus": self.taus, "errors": self.errors, "orders": self.orders,
            "runtimes": self.runtimes, "partial": self.partial,
            "failures": self.failures,
        }


def observed_orders(errors: Sequence[float]) -> List[float]:
    """log2 ratios of consecutive ladder errors (NaN where undefined)."""
    orders = []
    for a, b in zip(errors[:-1], errors[1:]):
        if a > 0 and b > 0 and np.isfinite(a) and np.isfinite(b):
            orders.append(math.log2(a / b))
        else:
            orders.append(float("nan"))
    return orders


def convergence_study(shape: ShapeSpec, flow: FlowKind, scheme: Scheme,
                      metric: MetricKind, tau0: float, levels: int, n: int,
                      t_end: float, *, n_ref: Optional[int] = None,
                      tau_ref: Optional[float] = None, cache=None,
                      init_mode: InitMode = InitMode.KAPPA_FORMULA,
                      n_mr: float = 10.0,
                      reference: Optional[PolygonalCurve] = None) -> ConvergenceReport:
    """Temporal convergence study per the tau-halving ladder tau0 / 2^k.

    The reference defaults to the same vertex count as the runs (function
    metrics require index-aligned curves of equal N) and to an eighth of the
    finest ladder step.  Reference generation is excluded from the reported
    runtimes.  A failed level leaves a NaN error and marks the report partial.
    """
    flow, scheme, metric = FlowKind(flow), Scheme(scheme), MetricKind(metric)
    taus = [tau0 / 2.0 ** k for k in range(levels)]
    if n_ref is None:
        n_ref = n
    if tau_ref is None:
        tau_ref = taus[-1] / 8.0
    if reference is None:
        reference = reference_solution(shape, flow, n_ref, tau_ref, t_end,
                                       cache=cache, init_mode=init_mode)
    distance = metric_fn(metric)
    errors: List[float] = []
    runtimes: List[float] = []
    failures: List[str] = []
    for tau in taus:
        cfg = SchemeConfig(flow=flow, tau=tau, t_end=t_end, n=n,
                           n_mr=n_mr, init_mode=init_mode)
        try:
            tic = time.perf_counter()
            result = run(shape, cfg, scheme=scheme)
            runtimes.append(time.perf_counter() - tic)
            errors.append(float(distance(result.state.curr_curve, reference)))
        except (StepFailure, ConfigError) as exc:
            runtimes.append(float("nan"))
            errors.append(float("nan"))
            failures.append(f"tau={tau!r}: {exc}")
    return ConvergenceReport(
        metric=metric, taus=taus, errors=errors, orders=observed_orders(errors),
        runtimes=runtimes, shape=shape.cache_key(), flow=flow.value,
        scheme=scheme.value, n=n, t_end=t_end,
        partial=bool(failures), failures=failures)


# ---------------------------------------------------------------------------
# Diagnostics series
# ---------------------------------------------------------------------------

@dataclass
class DiagnosticsSeries:
    """Per-step geometric diagnostics of one run, relative to its t = 0 state."""

    times: np.ndarray
    rel_area_loss: np.ndarray    # (A_m - A_0) / A_0
    norm_perimeter: np.ndarray   # L_m / L_0
    psi: np.ndarray              # mesh ratio
    mr_count: np.ndarray         # cumulative mesh regularizations

    @classmethod
    def from_records(cls, records: Sequence[StepRecord]) -> "DiagnosticsSeries":
        if not records:
            raise ValueError("run produced no records")
        a0 = records[0].area
        l0 = records[0].perimeter
        return cls(
            times=np.array([r.time for r in records]),
            rel_area_loss=np.array([(r.area - a0) / a0 for r in records]),
            norm_perimeter=np.array([r.perimeter / l0 for r in records]),
            psi=np.array([r.mesh_ratio for r in records]),
            mr_count=np.array([r.mr_count for r in records]))


def diagnostics_series(source) -> DiagnosticsSeries:
    """Diagnostics from a RunResult or a list of step records."""
    records = source.records if isinstance(source, RunResult) else source
    return DiagnosticsSeries.from_records(records)


# ---------------------------------------------------------------------------
# CPU comparison
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CpuRow:
    scheme: str
    n: int
    e_manifold: float
    e_hausdorff: float
    seconds: float
    realized_t: float


def cpu_comparison(shape: ShapeSpec, flow: FlowKind, ns: Sequence[int], t_end: float,
                   schemes: Sequence[Scheme] = (Scheme.BGN1, Scheme.BGN2), *,
                   n_ref: Optional[int] = None, tau_ref: Optional[float] = None,
                   cache=None,
                   init_mode: InitMode = InitMode.KAPPA_FORMULA) -> List[CpuRow]:
    """Cost/accuracy table over an N ladder with the step-size rule
    tau = 0.5 / N.

    When t_end is not an integer multiple of tau the step count is rounded
    down and the realized final time is reported with the row.  Errors are
    shape-metric distances to a common reference at the realized time; wall
    times cover the evolution only.

    Exact references are sampled at 4x the finest ladder width (sampling is
    free, and the reference's own polygonal error must stay negligible
    against the errors being measured).
    """
    flow = FlowKind(flow)
    if n_ref is None:
        if has_exact_reference(shape, flow):
            n_ref = max(DESK_N_REF, 4 * max(ns))
        else:
            n_ref = DESK_N_REF
    if tau_ref is None:
        tau_ref = (0.5 / max(ns)) / 8.0
    references = {}
    rows: List[CpuRow] = []
    for scheme in schemes:
        scheme = Scheme(scheme)
        for n in ns:
            tau = 0.5 / n
            steps = int(math.floor(t_end / tau + 1e-9))
            realized_t = steps * tau
            if realized_t not in references:
                references[realized_t] = reference_solution(
                    shape, flow, n_ref, tau_ref, realized_t,
                    cache=cache, init_mode=init_mode)
            ref = references[realized_t]
            cfg = SchemeConfig(flow=flow, tau=tau, t_end=realized_t, n=n,
                               init_mode=init_mode)
            tic = time.perf_counter()
            result = run(shape, cfg, scheme=scheme)
            seconds = time.perf_counter() - tic
            final = result.state.curr_curve
            rows.append(CpuRow(
                scheme=scheme.value, n=n,
                e_manifold=metric_fn(MetricKind.MANIFOLD)(final, ref),
                e_hausdorff=metric_fn(MetricKind.HAUSDORFF)(final, ref),
                seconds=seconds, realized_t=realized_t))
    return rows


# ---------------------------------------------------------------------------
# Report files (CSV with a JSON mirror; 17 significant digits)
# ---------------------------------------------------------------------------

def _fmt(value: float) -> str:
    return f"{value:.17g}"


def write_convergence_csv(report: ConvergenceReport, path) -> None:
    with open(path, "w") as fh:
        fh.write("tau,error,order,seconds\n")
        for i, (tau, err, sec) in enumerate(zip(report.taus, report.errors, report.runtimes)):
            order = "" if i == 0 else _fmt(report.orders[i - 1])
            fh.write(f"{_fmt(tau)},{_fmt(err)},{order},{_fmt(sec)}\n")


def write_convergence_json(report: ConvergenceReport, path) -> None:
    import json
    with open(path, "w") as fh:
        json.dump(report.as_dict(), fh, indent=2)


def write_diagnostics_csv(series: DiagnosticsSeries, path) -> None:
    with open(path, "w") as fh:
        fh.write("t,dA,L_ratio,Psi,mr_count\n")
        for t, da, lr, psi, mr in zip(series.times, series.rel_area_loss,
                                      series.norm_perimeter, series.psi, series.mr_count):
            fh.write(f"{_fmt(t)},{_fmt(da)},{_fmt(lr)},{_fmt(psi)},{int(mr)}\n")


def write_cpu_csv(rows: Sequence[CpuRow], path) -> None:
    with open(path, "w") as fh:
        fh.write("scheme,n,e_manifold,e_hausdorff,seconds,realized_t\n")
        for r in rows:
            fh.write(f"{r.scheme},{r.n},{_fmt(r.e_manifold)},{_fmt(r.e_hausdorff)},"
                     f"{_fmt(r.seconds)},{_fmt(r.realized_t)}\n")
