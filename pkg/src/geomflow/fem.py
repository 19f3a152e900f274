"""Mass-lumped operators on a polygonal curve.

Nodal fields are plain ``(N,)`` float arrays (one value per vertex, periodic
indexing); nodal vector fields are ``(N, 2)``.  Per-edge constants (such as
the discrete normal) are indexed like edges: entry ``j`` lives on the segment
from vertex ``j-1`` to vertex ``j``.

The lumped inner product is the composite trapezoidal rule over the polygon,

    (u, v)^h = 1/2 sum_j |h_j| [ (u v)(rho_j^-) + (u v)(rho_{j-1}^+) ],

which for two nodal fields reduces to a diagonal mass matrix with
``M_jj = (|h_j| + |h_{j+1}|) / 2``.  The arclength derivative of a nodal
field is constant on each edge, ``(u_j - u_{j-1}) / |h_j|``, which yields the
cyclic tridiagonal stiffness matrix below.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import SingularNormalMatrix, SizeMismatch
from .geometry import PolygonalCurve, edge_data

# Condition threshold above which the curvature normal equations count as
# numerically singular.
NORMAL_EQ_COND_MAX = 1e14


@dataclass(frozen=True)
class AssembledOperators:
    """Matrices shared by every BGN-type scheme on a fixed polygon.

    ``mass`` is the diagonal of the lumped mass matrix (also the weight
    vector of the discrete inner product against 1).  ``nu`` holds the rows
    of the normal-coupling matrix: ``nu[j] = (|h_j| n_j + |h_{j+1}| n_{j+1}) / 2``,
    so ``(kappa, n . omega)^h = sum_j kappa_j (nu[j] . omega_j)``.
    ``stiffness`` is the cyclic tridiagonal matrix of
    ``(d_s u, d_s v)`` on the current polygon.
    """

    mass: np.ndarray        # (N,)
    nu: np.ndarray          # (N, 2)
    stiffness: sp.csr_matrix  # (N, N)
    edge_lengths: np.ndarray  # (N,)

    @property
    def n(self) -> int:
        return self.mass.shape[0]

    @property
    def ones_weight(self) -> np.ndarray:
        """Weights w with (u, 1)^h = w . u for nodal u."""
        return self.mass

    def normal_coupling(self) -> sp.csr_matrix:
        """The (2N, N) normal-coupling matrix with blocks diag(nu_x), diag(nu_y)."""
        return sp.vstack([sp.diags(self.nu[:, 0]), sp.diags(self.nu[:, 1])]).tocsr()


def _pair_values(values, kind, lengths):
    """Values of a field at (rho_j^-, rho_{j-1}^+) for each edge j."""
    values = np.asarray(values, dtype=float)
    n = lengths.shape[0]
    if values.shape[0] != n:
        raise SizeMismatch(f"field has {values.shape[0]} entries, curve has {n}")
    if kind == "node":
        return values, np.roll(values, 1, axis=0)
    if kind == "edge":
        return values, values
    raise ValueError(f"kind must be 'node' or 'edge', got {kind!r}")


def lumped_inner(curve: PolygonalCurve, u, v, u_on: str = "node", v_on: str = "node") -> float:
    """Mass-lumped inner product of two scalar or vector fields.

    ``u_on``/``v_on`` say whether the field is nodal or constant per edge;
    at the nodes, one-sided limits pair edge j's constant with the values of
    both of its endpoints.
    """
    lengths = edge_data(curve).lengths
    u_m, u_p = _pair_values(u, u_on, lengths)
    v_m, v_p = _pair_values(v, v_on, lengths)
    if u_m.shape[1:] != v_m.shape[1:]:
        raise SizeMismatch(f"field shapes {u_m.shape} and {v_m.shape} do not match")
    prod = u_m * v_m + u_p * v_p
    if prod.ndim == 2:
        prod = prod.sum(axis=1)
    return 0.5 * float(np.dot(lengths, prod))


def assemble(curve: PolygonalCurve) -> AssembledOperators:
    """Assemble lumped mass, normal coupling, and stiffness on ``curve``."""
    ed = edge_data(curve)
    lengths = ed.lengths
    n = curve.n
    mass = 0.5 * (lengths + np.roll(lengths, -1))
    weighted = lengths[:, None] * ed.normals
    nu = 0.5 * (weighted + np.roll(weighted, -1, axis=0))

    inv = 1.0 / lengths
    idx = np.arange(n)
    prev = (idx - 1) % n
    rows = np.concatenate([idx, prev, idx, prev])
    cols = np.concatenate([idx, prev, prev, idx])
    data = np.concatenate([inv, inv, -inv, -inv])
    stiffness = sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
    stiffness.sum_duplicates()

    mass.setflags(write=False)
    nu.setflags(write=False)
    return AssembledOperators(mass=mass, nu=nu, stiffness=stiffness, edge_lengths=lengths)


def discrete_curvature(curve: PolygonalCurve) -> np.ndarray:
    """Discrete curvature of a polygon from the defining relation
    ``kappa n = -d^2 X / ds^2``, solved in the least-squares sense.

    Forms the normal equations ``(N^T N) kappa = N^T A X`` with the
    normal-coupling matrix N and the blockwise stiffness A; ``N^T N`` is
    diagonal, so the solve is exact up to rounding.  Raises
    ``SingularNormalMatrix`` when the diagonal is ill conditioned (opposite
    edge normals nearly cancelling).
    """
    from .schemes import check_wellposed  # local import to avoid a cycle
    report = check_wellposed(curve)
    if not report.ok:
        from .errors import WellPosednessViolation
        raise WellPosednessViolation(report)

    ops = assemble(curve)
    gram = ops.nu[:, 0] ** 2 + ops.nu[:, 1] ** 2
    gmin, gmax = float(np.min(gram)), float(np.max(gram))
    cond = np.inf if gmin == 0.0 else gmax / gmin
    if cond > NORMAL_EQ_COND_MAX:
        raise SingularNormalMatrix(
            f"normal-equation condition estimate {cond:.3e} exceeds {NORMAL_EQ_COND_MAX:.0e}",
            condition=cond)
    ax = ops.stiffness @ curve.nodes  # (N, 2), stiffness applied to both coordinates
    rhs = ops.nu[:, 0] * ax[:, 0] + ops.nu[:, 1] * ax[:, 1]
    return rhs / gram
