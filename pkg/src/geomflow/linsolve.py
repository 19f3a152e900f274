"""Direct solution of the saddle-point systems assembled by the schemes.

The systems are sparse 3N x 3N with cyclic-banded blocks; they are small
enough that a sparse LU factorization is both exact (to rounding) and cheap.
The area-preserving flow adds a rank-1 average term, handled by a two-solve
correction against the unmodified factorization so the banded factorization
is reused.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SingularSystem

RESIDUAL_RTOL = 1e-12
COND_MAX = 1e14


@dataclass
class BlockSystem:
    """A sparse linear system ``(matrix + outer(u, v)) x = rhs``.

    ``rank1`` is the optional ``(u, v)`` pair of the average-subtraction term
    (only the area-preserving flow sets it).
    """

    matrix: sp.spmatrix
    rhs: np.ndarray
    rank1: Optional[Tuple[np.ndarray, np.ndarray]] = None

    def apply(self, x: np.ndarray) -> np.ndarray:
        y = self.matrix @ x
        if self.rank1 is not None:
            u, v = self.rank1
            y = y + u * float(v @ x)
        return y

    def operator_norm(self) -> float:
        norm = spla.norm(self.matrix, "fro")
        if self.rank1 is not None:
            u, v = self.rank1
            norm += float(np.linalg.norm(u) * np.linalg.norm(v))
        return float(norm)


def condition_estimate(matrix: sp.spmatrix, lu=None) -> float:
    """Cheap 1-norm condition estimate ||M||_1 * est(||M^-1||_1)."""
    try:
        if lu is None:
            lu = spla.splu(matrix.tocsc())
        inv_op = spla.LinearOperator(matrix.shape, matvec=lu.solve,
                                     rmatvec=lambda b: lu.solve(b, trans="T"))
        inv_norm = spla.onenormest(inv_op)
    except Exception:
        return np.inf
    m_norm = float(np.max(np.abs(matrix).sum(axis=0)))
    return float(m_norm * inv_norm)


def _sherman_morrison(lu, u, v, rhs):
    y = lu.solve(rhs)
    z = lu.solve(u)
    denom = 1.0 + float(v @ z)
    if denom == 0.0 or not np.isfinite(denom):
        raise SingularSystem("rank-1 correction is singular (1 + v^T A^-1 u == 0)")
    return y - z * (float(v @ y) / denom)


def solve(system: BlockSystem) -> np.ndarray:
    """Solve the block system directly; relative residual is at most 1e-12.

    Raises ``SingularSystem`` (with a condition estimate attached) when the
    factorization fails or the residual contract cannot be met even after one
    step of iterative refinement.
    """
    matrix = system.matrix.tocsc()
    rhs = np.asarray(system.rhs, dtype=float)
    try:
        lu = spla.splu(matrix)
    except RuntimeError as exc:
        raise SingularSystem(f"sparse LU failed: {exc}",
                             condition=condition_estimate(matrix)) from exc

    if system.rank1 is not None:
        u, v = system.rank1
        x = _sherman_morrison(lu, u, v, rhs)
    else:
        x = lu.solve(rhs)

    norm_m = system.operator_norm()

    def rel_residual(sol):
        r = system.apply(sol) - rhs
        denom = norm_m * np.linalg.norm(sol) + np.linalg.norm(rhs)
        if denom == 0.0:
            return float(np.linalg.norm(r))
        return float(np.linalg.norm(r) / denom)

    res = rel_residual(x)
    if not np.isfinite(res) or res > RESIDUAL_RTOL:
        # One step of iterative refinement with the stored factorization.
        r = rhs - system.apply(x)
        if system.rank1 is not None:
            x = x + _sherman_morrison(lu, *system.rank1, r)
        else:
            x = x + lu.solve(r)
        res = rel_residual(x)
        if not np.isfinite(res) or res > RESIDUAL_RTOL:
            cond = condition_estimate(matrix, lu)
            raise SingularSystem(
                f"relative residual {res:.3e} exceeds {RESIDUAL_RTOL:.0e} "
                f"(condition estimate {cond:.3e})", condition=cond)
    return x
