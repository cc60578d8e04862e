"""The explicit test functions that defeat the Poincare inequality.

``chi_n`` is the cut-off family on [-1, 1] used when d1 >= 1/2: it is 0
on [-1/n, 1/n] and climbs to +-1 along eta and sigma. ``chi_log`` gives the
large-cube counterexamples when d1 < 1/2 <= d1'.

Note on the energy of chi_n: with eta_n = eta(1/n) and sigma_n = sigma(-1/n)
the weighted energy equals 1/eta_n + 1/sigma_n. Both eta_n and sigma_n
diverge for d1 >= 1/2, so the energy tends to 0 (it is 2/log n at d1 = 1/2).
"""
from __future__ import annotations

import numpy as np
from scipy import integrate

from ..geometry import DegeneracyParams, Interval
from .eigen import spectral_gap
from .forms import assemble_interval_form


def _check_d(d1: float) -> None:
    if not 0.0 <= d1 < 1.0:
        raise ValueError("d1 must lie in [0, 1)")


def eta(d1: float, x):
    """eta(x) = int_x^1 s^(-2 d1) ds for 0 < x <= 1."""
    x = np.asarray(x, dtype=float)
    if d1 == 0.5:
        return -np.log(x)
    q = 1.0 - 2.0 * d1
    return (1.0 - x**q) / q


def chi_n(d1: float, n: float, x) -> np.ndarray:
    """Evaluate chi_n on the points x (any real values)."""
    _check_d(d1)
    if not n >= 2:
        raise ValueError("nParam must be >= 2")
    x = np.asarray(x, dtype=float)
    a = np.abs(x)
    eta_n = eta(d1, 1.0 / n)
    # sigma(x) = eta(|x|) on [-1, -1/n] by symmetry, so sigma_n = eta_n
    inner = (a > 1.0 / n) & (a < 1.0)
    mag = np.zeros_like(a)
    mag[a >= 1.0] = 1.0
    mag[inner] = 1.0 - eta(d1, a[inner]) / eta_n
    return np.sign(x) * mag


def chi_n_energy(d1: float, n: float) -> float:
    """Closed form of int_{-1}^{1} |x|^(2 d1) chi_n'(x)^2 dx = 1/eta_n + 1/sigma_n."""
    _check_d(d1)
    e = float(eta(d1, 1.0 / n))
    return 2.0 / e


def chi_n_variance(d1: float, n: float) -> float:
    """int_{-1}^{1} (chi_n - mean)^2 dx; the mean is 0 by oddness."""
    val, _ = integrate.quad(lambda s: float(chi_n(d1, n, s)) ** 2, 1.0 / n, 1.0, limit=200, epsabs=1e-13, epsrel=1e-12)
    return 2.0 * val


def chi_n_report(d1: float, n: float, N: int | None = None) -> dict:
    """Continuum Rayleigh ratio of chi_n and, given N, its discrete ratio and
    the discrete gap on the same grid of [-1, 1]."""
    energy = chi_n_energy(d1, n)
    var = chi_n_variance(d1, n)
    out = {"d1": d1, "n": n, "energy": energy, "variance": var, "rayleigh": energy / var}
    if d1 == 0.5:
        out["closed_form_energy"] = 2.0 / np.log(n)
    if N is not None:
        form = assemble_interval_form(DegeneracyParams(d1=d1, d1p=d1), Interval(-1.0, 1.0), N)
        u = chi_n(d1, n, form.nodes[:, 0])
        out["discrete_rayleigh"] = form.rayleigh(u)
        out["discrete_gap"] = spectral_gap(form).gap
        out["N"] = N
    return out


def chi_log_values(d1: float, d1p: float, x) -> np.ndarray:
    """The odd test function: integral of s^(-2 d1, -1) when d1' = 1/2, and
    the C^1 ramp sin(pi x / 2) clipped at +-1 when d1' > 1/2."""
    x = np.asarray(x, dtype=float)
    a = np.abs(x)
    if d1p == 0.5:
        q = 1.0 - 2.0 * d1
        inner = np.minimum(a, 1.0) ** q / q
        mag = np.where(a <= 1.0, inner, 1.0 / q + np.log(np.maximum(a, 1.0)))
    else:
        mag = np.where(a <= 1.0, np.sin(0.5 * np.pi * np.minimum(a, 1.0)), 1.0)
    return np.sign(x) * mag


def chi_log(d1: float, d1p: float, t: float, grid: int = 2049) -> dict:
    """Both sides of the Poincare inequality on |x1| < t^(alpha, alpha').

    Returns energy = int w chi'^2, variance = int chi^2 (the average is 0),
    the Rayleigh ratio energy / variance and normalized = ratio * t^2, plus
    the function sampled on ``grid`` equispaced points.
    """
    if not 0.0 <= d1 < 0.5:
        raise ValueError("chi_log needs d1 in [0, 1/2)")
    if not 0.5 <= d1p < 1.0:
        raise ValueError("chi_log needs d1p in [1/2, 1)")
    if not t > 0:
        raise ValueError("t must be positive")
    p = DegeneracyParams(d1=d1, d1p=d1p)
    e = p.exponents
    T = t**e.alpha if t <= 1 else t**e.alphap
    if d1p == 0.5:
        q = 1.0 - 2.0 * d1
        # w chi'^2 = x^(2 d1) x^(-4 d1) on (0, 1) and x * x^(-2) beyond
        energy = 2.0 * (min(T, 1.0) ** q / q + (np.log(T) if T > 1 else 0.0))
        c = 1.0 / q

        def sq(s):
            return (s**q / q) ** 2 if s <= 1 else (c + np.log(s)) ** 2

        pts = [1.0] if T > 1 else None
        var, _ = integrate.quad(sq, 0.0, T, points=pts, limit=400, epsrel=1e-12)
        var *= 2.0
        kind = "log"
    else:
        def dens(s):
            return s ** (2 * d1) * (0.5 * np.pi * np.cos(0.5 * np.pi * s)) ** 2

        energy, _ = integrate.quad(dens, 0.0, min(T, 1.0), limit=200, epsrel=1e-12)
        energy *= 2.0
        inner = min(T, 1.0)
        var = 2.0 * (0.5 * inner - np.sin(np.pi * inner) / (2 * np.pi) + max(T - 1.0, 0.0))
        kind = "ramp"
    x = np.linspace(-T, T, grid)
    ratio = energy / var
    return {
        "kind": kind,
        "d1": d1,
        "d1p": d1p,
        "t": t,
        "half_width": T,
        "energy": energy,
        "variance": var,
        "rayleigh": ratio,
        "normalized": ratio * t * t,
        "x": x,
        "values": chi_log_values(d1, d1p, x),
    }

