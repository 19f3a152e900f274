"""Time stepping for geometric flows of closed curves.

Implements the first-order semi-implicit scheme (BGN1) and the two-step
Crank-Nicolson leap-frog scheme (BGN2) for three flows:

* ``CSF``    curve-shortening flow, normal velocity -kappa
* ``APCSF``  area-preserving variant, normal velocity -kappa + <kappa>
* ``SDF``    surface diffusion, normal velocity d^2 kappa / ds^2

Both schemes solve one sparse 3N x 3N linear system per step, assembled on
the current polygon.  The BGN2 system matrix coincides with the BGN1 matrix
on the same polygon (only the right-hand side differs), so well-posedness is
inherited.  The driver ``run`` applies the leap-frog scheme with a mesh
regularization fallback: whenever the mesh ratio exceeds the configured
threshold, the current level is recomputed with one first-order step from the
previous level, which restores a near-equidistributed vertex distribution.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from . import geometry
from .errors import (ConfigError, DegenerateEdge, SingularSystem, StepFailure,
                     WellPosednessViolation)
from .fem import AssembledOperators, assemble, discrete_curvature
from .geometry import PolygonalCurve, ShapeSpec, equidistributed_sample
from .linsolve import BlockSystem, solve

# Tolerance for the edge-parallelism test of the well-posedness check.
PARALLEL_EPS = 1e-12
# Relative slack on the mild energy-stability bound E_{m+1} <= Psi_m E_{m-1}.
ENERGY_SLACK = 1e-10


class FlowKind(str, enum.Enum):
    CSF = "csf"
    APCSF = "apcsf"
    SDF = "sdf"


class InitMode(str, enum.Enum):
    #: curvature of the initial polygon from the least-squares formula, then
    #: one first-order step
    KAPPA_FORMULA = "kappa"
    #: two first-order steps; the leap-frog starts at level 2
    DOUBLE_BGN1 = "double-bgn1"


class Scheme(str, enum.Enum):
    BGN1 = "bgn1"
    BGN2 = "bgn2"


@dataclass(frozen=True)
class SchemeConfig:
    """Parameters of one evolution run."""

    flow: FlowKind
    tau: float
    t_end: float
    n: int
    n_mr: float = 10.0
    init_mode: InitMode = InitMode.KAPPA_FORMULA

    def __post_init__(self):
        if self.tau <= 0:
            raise ConfigError(f"tau must be positive, got {self.tau}")
        if self.t_end < self.tau:
            raise ConfigError(f"t_end must be at least tau, got {self.t_end} < {self.tau}")
        if not self.n_mr > 1:
            raise ConfigError(f"mesh-ratio threshold must exceed 1, got {self.n_mr}")
        if self.n < 3:
            raise ConfigError(f"need at least 3 vertices, got {self.n}")

    def step_count(self) -> int:
        """Number of uniform steps; T must be an integer multiple of tau."""
        m = int(round(self.t_end / self.tau))
        if m < 1 or abs(m * self.tau - self.t_end) > 1e-9 * max(1.0, self.t_end):
            raise ConfigError(
                f"t_end/tau = {self.t_end / self.tau!r} is not an integer; "
                "the leap-frog scheme requires a uniform step size")
        return m


@dataclass(frozen=True)
class WellPosednessReport:
    ok: bool
    failed_condition: int = 0   # 0 = ok, 1 = all edges parallel, 2 = degenerate vertex
    detail: str = ""

    def __str__(self):
        return "ok" if self.ok else f"condition ({self.failed_condition}) violated: {self.detail}"


MrEvent = Tuple[int, float, float]  # (step index, mesh ratio before, after)


@dataclass
class SchemeState:
    """Two-level history of the leap-frog scheme at time t_m = m * tau."""

    prev_curve: PolygonalCurve
    prev_kappa: Optional[np.ndarray]
    curr_curve: PolygonalCurve
    curr_kappa: Optional[np.ndarray]
    step_index: int
    tau: float
    mr_events: List[MrEvent] = field(default_factory=list)
    #: all levels produced by initialization: (step, curve, kappa-or-None)
    init_levels: tuple = ()

    @property
    def t(self) -> float:
        return self.step_index * self.tau


@dataclass(frozen=True)
class StepRecord:
    """Diagnostics delivered to observers after each accepted level."""

    step: int
    time: float
    area: float
    perimeter: float
    energy: float
    mesh_ratio: float
    mr_count: int


@dataclass(frozen=True)
class EnergyCheck:
    """One instance of the mild energy-stability bound E_{m+1} <= Psi_m E_{m-1}."""

    step: int           # index m+1 of the produced level
    energy_new: float   # E_{m+1}
    bound: float        # Psi_m * E_{m-1}
    ok: bool


@dataclass
class RunResult:
    state: SchemeState
    records: List[StepRecord]
    energy_checks: List[EnergyCheck]

    @property
    def mr_events(self) -> List[MrEvent]:
        return self.state.mr_events


Observer = Callable[[StepRecord, PolygonalCurve, Optional[np.ndarray]], None]


# ---------------------------------------------------------------------------
# Well-posedness
# ---------------------------------------------------------------------------

def check_wellposed(curve: PolygonalCurve) -> WellPosednessReport:
    """Check the two solvability assumptions on the current polygon:
    (1) the edge vectors span the plane, (2) no vertex has collapsed.
    Returns a diagnostic report instead of raising."""
    vectors, lengths = geometry._raw_edges(curve)
    longest = int(np.argmax(lengths))
    cross = np.abs(vectors[longest, 0] * vectors[:, 1] - vectors[longest, 1] * vectors[:, 0])
    if not np.any(cross > PARALLEL_EPS * lengths[longest] * lengths):
        return WellPosednessReport(
            ok=False, failed_condition=1,
            detail="all edge vectors are parallel (span has dimension < 2)")
    eps = geometry.EDGE_DEGENERACY_REL * float(np.sum(lengths)) / curve.n
    if np.min(lengths) <= eps:
        j = int(np.argmin(lengths))
        return WellPosednessReport(
            ok=False, failed_condition=2,
            detail=f"edge {j} has length {lengths[j]:.3e} <= {eps:.3e}")
    return WellPosednessReport(ok=True)


def _require_wellposed(curve: PolygonalCurve) -> None:
    report = check_wellposed(curve)
    if not report.ok:
        raise WellPosednessViolation(report)


# ---------------------------------------------------------------------------
# System assembly shared by BGN1 and BGN2
# ---------------------------------------------------------------------------

def _kappa_block(flow: FlowKind, ops: AssembledOperators, tau: float):
    """The tau-scaled kappa block of the first equation, plus the rank-1
    average term of the area-preserving flow (returned separately)."""
    n = ops.n
    if flow is FlowKind.SDF:
        return tau * ops.stiffness, None
    block = sp.diags(tau * ops.mass)
    if flow is FlowKind.CSF:
        return block, None
    # APCSF: subtract the lumped average  <kappa> = (w . kappa) / (w . 1).
    w = ops.ones_weight
    length = float(np.sum(w))
    u = np.zeros(3 * n)
    v = np.zeros(3 * n)
    u[:n] = -(tau / length) * w
    v[2 * n:] = w
    return block, (u, v)


def build_system_matrix(flow: FlowKind, ops: AssembledOperators, tau: float):
    """The 3N x 3N matrix shared by BGN1 and BGN2 on the same polygon,
    ordered as unknowns [x, y, kappa]."""
    n = ops.n
    dx = sp.diags(ops.nu[:, 0])
    dy = sp.diags(ops.nu[:, 1])
    kblock, rank1 = _kappa_block(flow, ops, tau)
    a = ops.stiffness
    zero = sp.csr_matrix((n, n))
    matrix = sp.bmat([
        [dx, dy, kblock],
        [a, zero, -dx],
        [zero, a, -dy],
    ], format="csc")
    return matrix, rank1


def _kappa_action(flow: FlowKind, ops: AssembledOperators, kappa: np.ndarray) -> np.ndarray:
    """Apply the (unscaled) kappa block of the first equation to a known field."""
    if flow is FlowKind.SDF:
        return ops.stiffness @ kappa
    out = ops.mass * kappa
    if flow is FlowKind.APCSF:
        w = ops.ones_weight
        out = out - w * (float(w @ kappa) / float(np.sum(w)))
    return out


def _split_solution(sol: np.ndarray, n: int):
    nodes = np.column_stack([sol[:n], sol[n:2 * n]])
    kappa = sol[2 * n:]
    return PolygonalCurve(nodes, orientation="keep"), kappa


def bgn1_step(flow: FlowKind, curve: PolygonalCurve, tau: float):
    """One first-order semi-implicit step from the polygon ``curve``.

    Returns the new polygon and the new nodal curvature.  Only the current
    positions are needed; the curvature unknown is recomputed every step.
    """
    _require_wellposed(curve)
    ops = assemble(curve)
    n = ops.n
    matrix, rank1 = build_system_matrix(flow, ops, tau)
    rhs = np.zeros(3 * n)
    rhs[:n] = ops.nu[:, 0] * curve.nodes[:, 0] + ops.nu[:, 1] * curve.nodes[:, 1]
    sol = solve(BlockSystem(matrix, rhs, rank1))
    return _split_solution(sol, n)


def bgn2_step(flow: FlowKind, state: SchemeState, tau: float):
    """One Crank-Nicolson leap-frog step using the two-level history in
    ``state``; all operators are assembled on the current polygon and every
    known (m-1) term is moved to the right-hand side."""
    curve = state.curr_curve
    prev = state.prev_curve
    if prev.n != curve.n:
        raise ConfigError("history levels have different vertex counts")
    if state.prev_kappa is None:
        raise ConfigError("leap-frog step needs the curvature of the previous level")
    _require_wellposed(curve)
    ops = assemble(curve)
    n = ops.n
    matrix, rank1 = build_system_matrix(flow, ops, tau)
    kappa_prev = np.asarray(state.prev_kappa, dtype=float)
    rhs = np.empty(3 * n)
    rhs[:n] = (ops.nu[:, 0] * prev.nodes[:, 0] + ops.nu[:, 1] * prev.nodes[:, 1]
               - tau * _kappa_action(flow, ops, kappa_prev))
    ax = ops.stiffness @ prev.nodes
    rhs[n:2 * n] = ops.nu[:, 0] * kappa_prev - ax[:, 0]
    rhs[2 * n:] = ops.nu[:, 1] * kappa_prev - ax[:, 1]
    sol = solve(BlockSystem(matrix, rhs, rank1))
    return _split_solution(sol, n)


# ---------------------------------------------------------------------------
# Initialization and the full driver
# ---------------------------------------------------------------------------

def initialize(shape: ShapeSpec, cfg: SchemeConfig) -> SchemeState:
    """Prepare the two-level history the leap-frog scheme starts from.

    ``KAPPA_FORMULA`` computes the initial curvature from the least-squares
    formula and takes one first-order step; ``DOUBLE_BGN1`` takes two
    first-order steps (recommended for irregular initial curves) and starts
    at level 2.
    """
    x0 = equidistributed_sample(shape, cfg.n)
    if cfg.init_mode is InitMode.KAPPA_FORMULA:
        kappa0 = discrete_curvature(x0)
        x1, kappa1 = bgn1_step(cfg.flow, x0, cfg.tau)
        return SchemeState(
            prev_curve=x0, prev_kappa=kappa0, curr_curve=x1, curr_kappa=kappa1,
            step_index=1, tau=cfg.tau,
            init_levels=((0, x0, kappa0), (1, x1, kappa1)))
    x1, kappa1 = bgn1_step(cfg.flow, x0, cfg.tau)
    x2, kappa2 = bgn1_step(cfg.flow, x1, cfg.tau)
    return SchemeState(
        prev_curve=x1, prev_kappa=kappa1, curr_curve=x2, curr_kappa=kappa2,
        step_index=2, tau=cfg.tau,
        init_levels=((0, x0, None), (1, x1, kappa1), (2, x2, kappa2)))


def _make_record(step: int, tau: float, curve: PolygonalCurve, mr_count: int) -> StepRecord:
    return StepRecord(
        step=step, time=step * tau,
        area=geometry.enclosed_area(curve),
        perimeter=geometry.perimeter(curve),
        energy=geometry.energy(curve),
        mesh_ratio=geometry.mesh_ratio(curve),
        mr_count=mr_count)


def run(shape: ShapeSpec, cfg: SchemeConfig,
        observers: Sequence[Observer] = (),
        scheme: Scheme = Scheme.BGN2) -> RunResult:
    """Evolve ``shape`` under ``cfg.flow`` until t = t_end.

    With the leap-frog scheme this is the complete regularized algorithm: at
    every step the mesh ratio of the current level is checked against
    ``cfg.n_mr``; if exceeded, the level is replaced by one first-order step
    from the untouched previous level (recorded as an mr event, including the
    ratio before and after; the run proceeds even if the fallback is still
    above threshold).  Observers are called once per accepted level with
    ``(record, curve, kappa)`` and must not mutate either.

    Raises ``StepFailure`` (carrying the offending step index and the partial
    result) when a step cannot be completed.
    """
    total_steps = cfg.step_count()
    records: List[StepRecord] = []
    energy_checks: List[EnergyCheck] = []

    def emit(step, curve, kappa, mr_count):
        record = _make_record(step, cfg.tau, curve, mr_count)
        records.append(record)
        for obs in observers:
            obs(record, curve, kappa)

    if scheme is Scheme.BGN1:
        return _run_bgn1(shape, cfg, total_steps, emit, records, energy_checks)

    if cfg.init_mode is InitMode.DOUBLE_BGN1 and total_steps < 2:
        raise ConfigError("double-BGN1 initialization needs t_end >= 2 * tau")

    try:
        state = initialize(shape, cfg)
    except Exception as exc:
        raise StepFailure(0, exc) from exc
    for step, curve, kappa in state.init_levels:
        emit(step, curve, kappa, 0)

    m = state.step_index
    while m < total_steps:
        try:
            psi = geometry.mesh_ratio(state.curr_curve)
            if psi > cfg.n_mr:
                x_reg, kappa_reg = bgn1_step(cfg.flow, state.prev_curve, cfg.tau)
                psi_after = geometry.mesh_ratio(x_reg)
                state.mr_events.append((m, psi, psi_after))
                state.curr_curve, state.curr_kappa = x_reg, kappa_reg
                psi = psi_after
            x_next, kappa_next = bgn2_step(cfg.flow, state, cfg.tau)
        except (SingularSystem, WellPosednessViolation, DegenerateEdge, ConfigError) as exc:
            raise StepFailure(
                m, exc, RunResult(state, records, energy_checks)) from exc
        e_new = geometry.energy(x_next)
        bound = psi * geometry.energy(state.prev_curve)
        energy_checks.append(EnergyCheck(
            step=m + 1, energy_new=e_new, bound=bound,
            ok=e_new <= bound * (1.0 + ENERGY_SLACK)))
        state.prev_curve, state.prev_kappa = state.curr_curve, state.curr_kappa
        state.curr_curve, state.curr_kappa = x_next, kappa_next
        state.step_index = m = m + 1
        emit(m, x_next, kappa_next, len(state.mr_events))
    return RunResult(state, records, energy_checks)


def _run_bgn1(shape, cfg, total_steps, emit, records, energy_checks):
    """Plain first-order evolution (no regularization needed: the first-order
    scheme is itself the mesh regularizer)."""
    try:
        x0 = equidistributed_sample(shape, cfg.n)
    except Exception as exc:
        raise StepFailure(0, exc) from exc
    emit(0, x0, None, 0)
    prev_curve, prev_kappa = x0, None
    curr_curve, curr_kappa = x0, None
    m = 0
    while m < total_steps:
        try:
            x_next, kappa_next = bgn1_step(cfg.flow, curr_curve, cfg.tau)
        except (SingularSystem, WellPosednessViolation, DegenerateEdge, ConfigError) as exc:
            state = SchemeState(prev_curve, prev_kappa, curr_curve, curr_kappa,
                                step_index=m, tau=cfg.tau)
            raise StepFailure(m, exc, RunResult(state, records, energy_checks)) from exc
        prev_curve, prev_kappa = curr_curve, curr_kappa
        curr_curve, curr_kappa = x_next, kappa_next
        m += 1
        emit(m, curr_curve, curr_kappa, 0)
    state = SchemeState(prev_curve, prev_kappa, curr_curve, curr_kappa,
                        step_index=m, tau=cfg.tau)
    return RunResult(state, records, energy_checks)
