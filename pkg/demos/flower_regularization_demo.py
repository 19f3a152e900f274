"""Mesh regularization on a hard nonconvex curve.

Surface diffusion of the twelve-petal flower with the two-step scheme: the
tangential oscillations of the leap-frog method distort the mesh badly, and
the run only stays usable because the first-order scheme is swapped in as a
regularizer whenever the mesh ratio exceeds the threshold.  The same run
with regularization disabled finishes with a severely clustered mesh.

The initial data here follows the two-first-order-steps variant, which is
the recommended start for irregular curves.

Run:  python demos/flower_regularization_demo.py      (~5 s)
"""

import pathlib

import numpy as np

import geomflow as gf
from geomflow.harness import diagnostics_series, write_diagnostics_csv
from geomflow.schemes import InitMode, SchemeConfig, run

OUT = pathlib.Path(__file__).parent / "output"


def main():
    OUT.mkdir(exist_ok=True)
    base = dict(flow=gf.FlowKind.SDF, tau=1.0 / 160.0, t_end=2.0, n=80,
                init_mode=InitMode.DOUBLE_BGN1)

    regularized = run(gf.Flower(), SchemeConfig(**base, n_mr=10.0))
    series = diagnostics_series(regularized)
    write_diagnostics_csv(series, OUT / "flower_mr_diagnostics.csv")
    final = regularized.state.curr_curve
    print(f"with regularization:    {len(regularized.mr_events)} interventions, "
          f"final mesh ratio {gf.mesh_ratio(final):.2f}, "
          f"final curve convex: {gf.is_convex(final)}")
    gf.geometry.save_snapshot_csv(OUT / "flower_mr_final.csv", final, 2.0)

    unregularized = run(gf.Flower(), SchemeConfig(**base, n_mr=float("inf")))
    series = diagnostics_series(unregularized)
    write_diagnostics_csv(series, OUT / "flower_nomr_diagnostics.csv")
    print(f"without regularization: mesh ratio peaks at {series.psi.max():.0f} "
          f"and ends at {series.psi[-1]:.0f} (clustered mesh)")
    print(f"\nwritten to {OUT}/")


if __name__ == "__main__":
    main()
