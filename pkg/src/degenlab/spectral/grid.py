"""Cell-centred tensor grids, uniform or smoothly graded towards the origin."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Axis:
    """One grid axis given by its cell faces (strictly increasing)."""

    faces: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.faces, dtype=float)
        if f.ndim != 1 or len(f) < 2 or np.any(np.diff(f) <= 0):
            raise ValueError("axis faces must be strictly increasing")
        object.__setattr__(self, "faces", f)

    @property
    def n(self) -> int:
        return len(self.faces) - 1

    @property
    def centres(self) -> np.ndarray:
        return 0.5 * (self.faces[1:] + self.faces[:-1])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.faces)

    @property
    def inner_faces(self) -> np.ndarray:
        return self.faces[1:-1]

    @property
    def centre_gaps(self) -> np.ndarray:
        return np.diff(self.centres)


def uniform_axis(a: float, b: float, n: int) -> Axis:
    if n < 1:
        raise ValueError("need at least one cell")
    return Axis(np.linspace(a, b, n + 1))


def graded_axis(a: float, b: float, n: int, h0: float) -> Axis:
    """Faces x = c + L sinh(k u) / sinh(k) over uniform u in [-1, 1].

    The centre c and half-length L come from [a, b]; k is chosen so that the
    cell at the centre has width close to ``h0``. Neighbouring cells differ by
    a factor of at most exp(2k/n), so the mesh is smooth. When the uniform
    width already satisfies ``h0`` this falls back to a uniform axis.
    """
    c, L = 0.5 * (a + b), 0.5 * (b - a)
    du = 2.0 / n
    if L * du <= h0:
        return uniform_axis(a, b, n)
    target = L * du / h0  # = sinh(k) / k
    lo, hi = 1e-12, 1.0
    while np.sinh(hi) / hi < target:
        hi *= 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.sinh(mid) / mid < target:
            lo = mid
        else:
            hi = mid
    k = 0.5 * (lo + hi)
    u = np.linspace(-1.0, 1.0, n + 1)
    faces = c + L * np.sinh(k * u) / np.sinh(k)
    faces[0], faces[-1] = a, b
    return Axis(faces)
