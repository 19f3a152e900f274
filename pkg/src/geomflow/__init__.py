"""geomflow: parametric finite element solvers for geometric flows of
closed planar curves (curve shortening, area-preserving curve shortening,
and surface diffusion), with shape-metric error measurement and a
convergence/diagnostics harness."""

__version__ = "0.1.0"

from .errors import (ClippingFailure, ConfigError, DegenerateEdge, GeomflowError,
                     SamplingFailure, SingularNormalMatrix, SingularSystem,
                     SizeMismatch, StepFailure, WellPosednessViolation)
from .geometry import (Circle, Custom, Ellipse, Flower, NonconvexBenchmark,
                       PolygonalCurve, ShapeSpec, Tube, edge_data, enclosed_area,
                       energy, equidistributed_sample, is_convex, make_shape,
                       mesh_ratio, perimeter)
from .fem import AssembledOperators, assemble, discrete_curvature, lumped_inner
from .linsolve import BlockSystem, solve
from .schemes import (FlowKind, InitMode, Scheme, SchemeConfig, SchemeState,
                      StepRecord, bgn1_step, bgn2_step, check_wellposed,
                      initialize, run)
from .metrics import (MetricKind, hausdorff_distance, l2_error, linf_error,
                      manifold_distance, metric_fn)
from .harness import (ConvergenceReport, DiagnosticsSeries, convergence_study,
                      cpu_comparison, diagnostics_series, reference_solution)

__all__ = [name for name in dir() if not name.startswith("_")]
