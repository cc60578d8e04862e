"""Piecewise powers, degeneracy parameters, the scaling semigroup and the
quasi-distance D.

Points are handled in split form ``(x1, x2)`` where ``x1`` has trailing
dimension ``n`` and ``x2`` trailing dimension ``m``; every function here
broadcasts over leading axes so that batches of sample points can be
processed without Python loops.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def piecewise_power(a, e):
    """Return ``a**e[0]`` where ``a <= 1`` and ``a**e[1]`` where ``a >= 1``.

    ``0**0`` is taken to be 1 and ``0**alpha`` is 0 for ``alpha > 0``.
    Negative exponents at ``a == 0`` give ``inf``.
    """
    alpha, alphap = e
    a = np.asarray(a, dtype=float)
    if np.any(a < 0):
        raise ValueError("piecewise_power needs a >= 0")
    with np.errstate(divide="ignore"):
        lo = np.power(a, alpha) if alpha != 0 else np.ones_like(a)
        hi = np.power(a, alphap) if alphap != 0 else np.ones_like(a)
    out = np.where(a <= 1.0, lo, hi)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class ScalingExponents:
    alpha: float
    alphap: float
    beta: float
    betap: float
    gamma: float
    gammap: float
    deltaM: float


@dataclass(frozen=True)
class DegeneracyParams:
    """Dimensions and degeneracy exponents of the generalized Grushin weight.

    ``d1, d1p`` control the normal coefficient ``|x1|^(2 d1, 2 d1p)`` and
    ``d2, d2p`` the tangential one ``|x1|^(2 d2, 2 d2p)``.
    """

    n: int = 1
    m: int = 0
    d1: float = 0.0
    d1p: float = 0.0
    d2: float = 0.0
    d2p: float = 0.0
    exponents: ScalingExponents = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if int(self.m) != self.m or self.m < 0:
            raise ValueError(f"m must be a non-negative integer, got {self.m}")
        for name in ("d1", "d1p"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ValueError(f"{name} must lie in [0, 1), got {v}")
        for name in ("d2", "d2p"):
            v = getattr(self, name)
            if not v >= 0.0:
                raise ValueError(f"{name} must be >= 0, got {v}")
        object.__setattr__(self, "exponents", derived_exponents(self))

    @property
    def dim(self) -> int:
        return self.n + self.m

    def replace(self, **kw) -> "DegeneracyParams":
        vals = dict(n=self.n, m=self.m, d1=self.d1, d1p=self.d1p, d2=self.d2, d2p=self.d2p)
        vals.update(kw)
        return DegeneracyParams(**vals)

    def as_dict(self) -> dict:
        return dict(n=self.n, m=self.m, d1=self.d1, d1p=self.d1p, d2=self.d2, d2p=self.d2p)


def derived_exponents(p: DegeneracyParams) -> ScalingExponents:
    alpha = 1.0 / (1.0 - p.d1)
    alphap = 1.0 / (1.0 - p.d1p)
    return ScalingExponents(
        alpha=alpha,
        alphap=alphap,
        beta=(1.0 + p.d2 - p.d1) * alpha,
        betap=(1.0 + p.d2p - p.d1p) * alphap,
        gamma=p.d2 / (1.0 + p.d2 - p.d1),
        gammap=p.d2p / (1.0 + p.d2p - p.d1p),
        deltaM=max(p.d1, p.d1p, p.d2, p.d2p),
    )


@dataclass(frozen=True)
class Point:
    x1: tuple
    x2: tuple = ()

    def __post_init__(self):
        for name in ("x1", "x2"):
            vals = np.atleast_1d(np.asarray(getattr(self, name), dtype=float)).ravel()
            object.__setattr__(self, name, tuple(float(v) for v in vals))

    def arrays(self):
        return np.array(self.x1, dtype=float), np.array(self.x2, dtype=float)

    def check(self, p: DegeneracyParams) -> None:
        if len(self.x1) != p.n or len(self.x2) != p.m:
            raise ValueError(
                f"point has dims ({len(self.x1)}, {len(self.x2)}), params need ({p.n}, {p.m})"
            )


def origin(p: DegeneracyParams) -> Point:
    return Point(np.zeros(p.n), np.zeros(p.m))


def _split(p: DegeneracyParams, x):
    """Accept a Point, a pair of arrays, or a flat array with n+m trailing."""
    if isinstance(x, Point):
        x.check(p)
        return x.arrays()
    if isinstance(x, tuple) and len(x) == 2:
        x1, x2 = (np.asarray(v, dtype=float) for v in x)
    else:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != p.dim:
            raise ValueError(f"expected trailing dimension {p.dim}, got {x.shape[-1]}")
        x1, x2 = x[..., : p.n], x[..., p.n :]
    if x1.shape[-1] != p.n or (x2.shape[-1] if x2.ndim else 0) != p.m:
        raise ValueError("dimension mismatch between point and params")
    return x1, x2


def _norm(v):
    return np.sqrt(np.sum(v * v, axis=-1)) if v.shape[-1] else np.zeros(v.shape[:-1])


def scale_point(p: DegeneracyParams, t: float, x):
    """Apply sigma_t: (x1, x2) -> (t^(alpha,alpha') x1, t^(beta,beta') x2)."""
    if not t > 0:
        raise ValueError("scale parameter t must be positive")
    e = p.exponents
    x1, x2 = _split(p, x)
    s1 = piecewise_power(t, (e.alpha, e.alphap))
    s2 = piecewise_power(t, (e.beta, e.betap))
    if isinstance(x, Point):
        return Point(x1 * s1, x2 * s2)
    return x1 * s1, x2 * s2


def _safe_ratio(num, den):
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = num / den
    return np.where(num == 0.0, 0.0, q)


def distance_D(p: DegeneracyParams, x, y):
    """The quasi-distance D between x and y (symmetric, no triangle inequality)."""
    x1, x2 = _split(p, x)
    y1, y2 = _split(p, y)
    e = p.exponents
    s1 = _norm(x1) + _norm(y1)
    out = _safe_ratio(_norm(x1 - y1), piecewise_power(s1, (p.d1, p.d1p)))
    if p.m:
        s2 = _norm(x2) + _norm(y2)
        den = piecewise_power(s1, (p.d2, p.d2p)) + piecewise_power(s2, (e.gamma, e.gammap))
        out = out + _safe_ratio(_norm(x2 - y2), den)
    out = np.asarray(out, dtype=float)
    return float(out) if out.ndim == 0 else out


def r_xi(p: DegeneracyParams, xi1) -> float:
    xi1 = np.atleast_1d(np.asarray(xi1, dtype=float))
    return piecewise_power(_norm(xi1), (1.0 - p.d1, 1.0 - p.d1p))


def coefficient_weights(p: DegeneracyParams, x1norm, variant: str = "plain"):
    """Weights (w1, w2) of the normal and tangential gradients at |x1|.

    ``variant='hat'`` uses the exponent pairs (max, min) and ``'tilde'`` the
    pairs (min, max) of each (d_i, d_i') couple.
    """
    pairs = [(p.d1, p.d1p), (p.d2, p.d2p)]
    if variant == "hat":
        pairs = [(max(a, b), min(a, b)) for a, b in pairs]
    elif variant == "tilde":
        pairs = [(min(a, b), max(a, b)) for a, b in pairs]
    elif variant != "plain":
        raise ValueError(f"unknown weight variant {variant!r}")
    return tuple(piecewise_power(x1norm, (2 * a, 2 * b)) for a, b in pairs)


def carre_du_champ(p: DegeneracyParams, grad1, grad2, x, variant: str = "plain"):
    """w1(|x1|) |grad1|^2 + w2(|x1|) |grad2|^2."""
    x1, _ = _split(p, x)
    g1 = np.asarray(grad1, dtype=float)
    g2 = np.asarray(grad2, dtype=float)
    if g1.shape[-1] != p.n or (p.m and g2.shape[-1] != p.m):
        raise ValueError("gradient dimensions do not match params")
    w1, w2 = coefficient_weights(p, _norm(x1), variant)
    out = w1 * np.sum(g1 * g1, axis=-1)
    if p.m:
        out = out + w2 * np.sum(g2 * g2, axis=-1)
    out = np.asarray(out)
    return float(out) if out.ndim == 0 else out
