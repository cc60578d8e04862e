"""Smallest non-trivial generalized eigenpair K u = lambda M u.

Block inverse iteration with Rayleigh-Ritz: each sweep solves
(K + s M) Y = M X with one sparse LU factorisation, removes the constant
component in the M inner product (Neumann case), and extracts Ritz pairs.
Convergence is declared when the normwise backward error

    |K u - lambda M u| / ((|K| + |lambda| |M|) |u|)

of the lowest Ritz pair drops below ``tol``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .forms import DiscreteForm

TOL = 1e-9
MAX_ITER = 10_000
SHIFT_FACTOR = 1e-12
BLOCK = 4


class ConvergenceError(ArithmeticError):
    """Raised when inverse iteration hits its iteration cap."""

    def __init__(self, message: str, iterations: int, residual: float):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


@dataclass
class EigenResult:
    gap: float
    vector: np.ndarray
    iterations: int
    residual: float


def _m_orthonormalize(X, mvec):
    G = X.T @ (mvec[:, None] * X)
    # Cholesky of the Gram matrix; fall back to eigen-decomposition if the
    # block has become numerically rank deficient
    try:
        L = la.cholesky(G, lower=True)
        return la.solve_triangular(L, X.T, lower=True).T
    except la.LinAlgError:
        w, V = la.eigh(G)
        keep = w > w.max() * 1e-14
        return X @ (V[:, keep] / np.sqrt(w[keep]))


def _start_block(f: DiscreteForm, k: int) -> np.ndarray:
    """Deterministic start: coordinate functions plus seeded noise."""
    n = f.size
    cols = [f.nodes[:, j] - f.nodes[:, j].mean() for j in range(f.nodes.shape[1])]
    rng = np.random.default_rng(np.random.SeedSequence(0))
    while len(cols) < k:
        cols.append(rng.standard_normal(n))
    X = np.column_stack(cols[:k])
    return X


def spectral_gap(f: DiscreteForm, tol: float = TOL, max_iter: int = MAX_ITER, block: int = BLOCK) -> EigenResult:
    """Smallest eigenvalue of K u = lambda M u orthogonal to the constants.

    With a zero-order term present the smallest eigenvalue overall is
    returned and no deflation takes place.
    """
    K = f.operator.tocsc()
    mvec = np.asarray(f.cell_measure, dtype=float)
    n = f.size
    deflate = f.zero_order is None
    k = min(block, n - 1 if deflate else n)
    if k < 1:
        raise ValueError("form is too small for a gap")
    ones = np.ones(n)
    one_mass = float(mvec.sum())

    def project(Y):
        if deflate:
            Y = Y - np.outer(ones, (mvec @ Y) / one_mass)
        return Y

    scale = float(K.diagonal().sum() / mvec.sum())
    shift = SHIFT_FACTOR * scale
    lu = spla.splu((K + shift * sp.diags(mvec)).tocsc())
    knorm = spla.norm(K, 1)
    mnorm = float(mvec.max())

    X = _m_orthonormalize(project(_start_block(f, k)), mvec)
    lam, u, res = np.inf, None, np.inf
    for it in range(1, max_iter + 1):
        Y = project(lu.solve(mvec[:, None] * X))
        Y = _m_orthonormalize(Y, mvec)
        A = Y.T @ (K @ Y)
        A = 0.5 * (A + A.T)
        w, V = la.eigh(A)
        X = Y @ V
        lam = float(w[0])
        u = X[:, 0]
        r = K @ u - lam * mvec * u
        res = float(np.linalg.norm(r) / ((knorm + abs(lam) * mnorm) * np.linalg.norm(u)))
        if res <= tol:
            break
    else:
        raise ConvergenceError(
            f"inverse iteration did not reach residual {tol:g} in {max_iter} sweeps (last {res:.3e})",
            max_iter,
            res,
        )
    return EigenResult(gap=max(lam, 0.0), vector=u, iterations=it, residual=res)
