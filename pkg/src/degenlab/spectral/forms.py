"""Finite-volume assembly of the weighted Neumann forms of H_delta.

The discrete form of a grid function u is

    sum over interior faces of  c_f (u_i - u_j)^2

where the conductance of a face between neighbouring cells i and j is the
coefficient at the face midpoint times the face measure divided by the
distance of the cell centres. The mass matrix is diagonal with the cell
volumes. Faces on the boundary of the (rasterised) region carry no flux,
which is the discrete Neumann condition.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from ..geometry import (
    Ball,
    Cube,
    DegeneracyParams,
    HalfBall,
    HalfInterval,
    Interval,
    Region,
    ScaledBox,
    bounding_box,
    region_contains,
)
from ..geometry.core import piecewise_power
from .grid import Axis, graded_axis, uniform_axis

ZERO_ORDER_FACTOR = (np.pi / 2) ** 2
MAX_CELLS_2D = 4_000_000


@dataclass
class DiscreteForm:
    """Grid, stiffness K, diagonal mass and optional zero-order diagonal.

    ``nodes`` holds the cell centres of the active cells, shape (K, n+m).
    """

    nodes: np.ndarray
    cell_measure: np.ndarray
    stiffness: sp.csr_matrix
    zero_order: np.ndarray | None
    region: Region
    params: DegeneracyParams
    axes: tuple = ()
    active: np.ndarray | None = None  # boolean mask on the tensor grid
    dropped_cells: int = 0

    @property
    def size(self) -> int:
        return len(self.cell_measure)

    @property
    def operator(self) -> sp.csr_matrix:
        """Stiffness plus the zero-order diagonal, if present."""
        if self.zero_order is None:
            return self.stiffness
        return (self.stiffness + sp.diags(self.zero_order)).tocsr()

    def mass_matrix(self) -> sp.dia_matrix:
        return sp.diags(self.cell_measure)

    def energy(self, u) -> float:
        u = np.asarray(u, dtype=float)
        return float(u @ (self.operator @ u))

    def variance(self, u) -> float:
        """Mass-weighted squared deviation from the mass-weighted mean."""
        u = np.asarray(u, dtype=float)
        w = self.cell_measure
        mean = float(w @ u) / float(w.sum())
        return float(w @ (u - mean) ** 2)

    def rayleigh(self, u) -> float:
        """energy / variance (energy / mass norm when a zero-order term exists)."""
        u = np.asarray(u, dtype=float)
        den = float(self.cell_measure @ u**2) if self.zero_order is not None else self.variance(u)
        if den <= 0:
            raise ArithmeticError("Rayleigh quotient of a constant vector")
        return self.energy(u) / den


def _weights(p: DegeneracyParams, x1abs, which: int):
    if which == 1:
        return piecewise_power(x1abs, (2 * p.d1, 2 * p.d1p))
    return piecewise_power(x1abs, (2 * p.d2, 2 * p.d2p))


def _laplacian(n_nodes: int, i, j, c) -> sp.csr_matrix:
    """Graph Laplacian with edge list (i, j) and conductances c."""
    rows = np.r_[i, j, i, j]
    cols = np.r_[j, i, i, j]
    vals = np.r_[-c, -c, c, c]
    return sp.csr_matrix((vals, (rows, cols)), shape=(n_nodes, n_nodes))


def _interval_axis(reg: Region, N: int) -> Axis:
    if isinstance(reg, Interval):
        return uniform_axis(reg.a, reg.b, N)
    if isinstance(reg, HalfInterval):
        return uniform_axis(0.0, reg.b, N)
    raise TypeError("interval forms need an Interval or HalfInterval")


def _form_1d(p: DegeneracyParams, axis: Axis, reg: Region, with_zero_order: bool) -> DiscreteForm:
    x = axis.centres
    c = _weights(p, np.abs(axis.inner_faces), 1) / axis.centre_gaps
    idx = np.arange(axis.n - 1)
    K = _laplacian(axis.n, idx, idx + 1, c)
    h = axis.widths
    z = ZERO_ORDER_FACTOR * _weights(p, np.abs(x), 2) * h if with_zero_order else None
    return DiscreteForm(x[:, None], h, K, z, reg, p, axes=(axis,))


def assemble_interval_form(
    p: DegeneracyParams, interval: Region, N: int, with_zero_order: bool = False
) -> DiscreteForm:
    """Uniform cell-centred form on an Interval or HalfInterval with N cells.

    N must be odd and at least 3 so that on a symmetric interval the origin
    is a cell centre and no face sits on the degeneracy point.
    """
    if N < 3:
        raise ValueError("N must be >= 3")
    if N % 2 == 0:
        raise ValueError("N must be odd")
    if not (p.n == 1 and p.m == 0):
        raise ValueError("interval forms need n=1, m=0")
    return _form_1d(p, _interval_axis(interval, N), interval, with_zero_order)


def _region_axes(p, reg, N1, N2, graded_h0):
    lo, hi = bounding_box(p, reg)
    if graded_h0 is not None:
        a1 = graded_axis(lo[0], hi[0], N1, graded_h0)
    else:
        a1 = uniform_axis(lo[0], hi[0], N1)
    axes = [a1]
    if p.m:
        axes.append(uniform_axis(lo[1], hi[1], N2))
    return axes


def _mask(p, reg, axes):
    if len(axes) == 1:
        pts = axes[0].centres[:, None]
    else:
        pts = np.stack(np.meshgrid(axes[0].centres, axes[1].centres, indexing="ij"), axis=-1)
    if isinstance(reg, (Cube,)):
        return np.ones(pts.shape[:-1], dtype=bool), pts
    return np.asarray(region_contains(p, reg, pts)), pts


def _crop(p, reg, axes, N1, N2, graded_h0):
    """Shrink the raster box to the occupied cells and rasterise again."""
    mask, _ = _mask(p, reg, axes)
    if not mask.any():
        raise ValueError("region rasterises to no cells; increase the resolution")
    new = []
    for k, ax in enumerate(axes):
        other = tuple(j for j in range(mask.ndim) if j != k)
        occ = np.nonzero(mask.any(axis=other) if other else mask)[0]
        lo, hi = ax.faces[occ[0]], ax.faces[occ[-1] + 1]
        n = N1 if k == 0 else N2
        if k == 0 and graded_h0 is not None:
            new.append(graded_axis(lo, hi, n, graded_h0))
        else:
            new.append(uniform_axis(lo, hi, n))
    return new


def assemble_region_form(
    p: DegeneracyParams,
    reg: Region,
    N1: int,
    N2: int | None = None,
    graded_h0: float | None = None,
) -> DiscreteForm:
    """Five-point (m=1) or three-point (m=0) form on a rasterised region.

    The grid is the tensor product of N1 cells along x1 and N2 along x2 on
    the region's bounding box, so cell sizes follow the anisotropic extents.
    Balls, half balls and scaled boxes are rasterised by cell-centre
    membership after cropping the box to the occupied cells; only the
    largest connected component of the raster is kept. ``graded_h0``
    requests a sinh-graded x1 axis with central cell width near ``h0``,
    which large cubes with growing weights need.
    """
    if p.n != 1 or p.m > 1:
        raise ValueError("region forms support n=1 and m in {0, 1}")
    if not isinstance(reg, (Cube, ScaledBox, Ball, HalfBall, Interval, HalfInterval)):
        raise TypeError(f"unsupported region {reg!r}")
    if isinstance(reg, (Interval, HalfInterval)):
        axis = _interval_axis(reg, N1)
        return _form_1d(p, axis, reg, False)
    N2 = N1 if N2 is None else N2
    if N1 < 3 or (p.m and N2 < 3):
        raise ValueError("need at least 3 cells per axis")
    if N1 % 2 == 0:
        # an x1 face on the degeneracy surface would cut the grid in two
        raise ValueError("N1 must be odd")
    if p.m and N1 * N2 > MAX_CELLS_2D:
        raise ValueError(f"N1*N2 exceeds the cap of {MAX_CELLS_2D} cells")
    axes = _region_axes(p, reg, N1, N2, graded_h0)
    if not isinstance(reg, Cube):
        axes = _crop(p, reg, axes, N1, N2, graded_h0)
    mask, pts = _mask(p, reg, axes)

    shape = mask.shape
    index = -np.ones(shape, dtype=np.int64)
    index[mask] = np.arange(int(mask.sum()))
    i_list, j_list, c_list = [], [], []

    a1 = axes[0]
    # x1-direction faces
    if len(axes) == 1:
        w = _weights(p, np.abs(a1.inner_faces), 1) / a1.centre_gaps
        both = mask[:-1] & mask[1:]
        i_list.append(index[:-1][both])
        j_list.append(index[1:][both])
        c_list.append(w[both])
        vol = a1.widths[mask]
    else:
        a2 = axes[1]
        w = (_weights(p, np.abs(a1.inner_faces), 1) / a1.centre_gaps)[:, None] * a2.widths[None, :]
        both = mask[:-1, :] & mask[1:, :]
        i_list.append(index[:-1, :][both])
        j_list.append(index[1:, :][both])
        c_list.append(w[both])
        # x2-direction faces: coefficient depends on x1 only
        w = (_weights(p, np.abs(a1.centres), 2) * a1.widths)[:, None] / a2.centre_gaps[None, :]
        both = mask[:, :-1] & mask[:, 1:]
        i_list.append(index[:, :-1][both])
        j_list.append(index[:, 1:][both])
        c_list.append(w[both])
        vol = np.outer(a1.widths, a2.widths)[mask]

    n_nodes = int(mask.sum())
    K = _laplacian(n_nodes, np.concatenate(i_list), np.concatenate(j_list), np.concatenate(c_list))
    nodes = pts[mask]
    ncomp, labels = connected_components(K, directed=False)
    dropped = 0
    if ncomp > 1:
        keep = labels == np.argmax(np.bincount(labels))
        dropped = n_nodes - int(keep.sum())
        K = K[keep][:, keep].tocsr()
        nodes, vol = nodes[keep], vol[keep]
        flat = np.flatnonzero(mask)
        mask = np.zeros(shape, dtype=bool)
        mask.flat[flat[keep]] = True
    if len(vol) < 3:
        raise ValueError("region rasterises to fewer than 3 connected cells")
    return DiscreteForm(nodes, vol, K.tocsr(), None, reg, p, axes=tuple(axes), active=mask, dropped_cells=dropped)

