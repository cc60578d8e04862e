"""One-dimensional diffusions with coefficient c(x) = (1 v |x|)^(2 d') and the
ends transform of the exceptional case.

The generator d/dx c d/dx corresponds to dX = c'(X) dt + sqrt(2 c(X)) dW.
Its scale function has s' = 1/c, so hitting probabilities are affine in s.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate

from . import rng as rngmod

MIN_PATHS = 100
STEP_CAP = 10_000_000
MAX_CENSORED = 0.01
PATH_BLOCK = 16_384
COMPACT_EVERY = 32


def _check_deltap(deltap: float) -> None:
    if not 0.0 <= deltap < 1.0:
        raise ValueError("deltap must lie in [0, 1)")


def coefficient(deltap: float, x):
    return np.maximum(1.0, np.abs(x)) ** (2 * deltap)


def coefficient_derivative(deltap: float, x):
    x = np.asarray(x, dtype=float)
    a = np.abs(x)
    return np.where(a > 1.0, 2 * deltap * np.sign(x) * np.maximum(a, 1.0) ** (2 * deltap - 1), 0.0)


def scale_function(deltap: float, x):
    """s(x) = int_0^x dy / c(y) in closed form (odd, increasing)."""
    _check_deltap(deltap)
    x = np.asarray(x, dtype=float)
    a = np.abs(x)
    big = np.maximum(a, 1.0)
    if deltap == 0.5:
        tail = 1.0 + np.log(big)
    else:
        q = 1.0 - 2.0 * deltap
        tail = 1.0 + (big**q - 1.0) / q
    out = np.sign(x) * np.where(a <= 1.0, a, tail)
    return out[()] if out.ndim == 0 else out


def hitting_oracle(deltap: float, a: float, x0: float, b: float) -> float:
    """Probability of reaching a before b from x0."""
    if a == b:
        raise ValueError("degenerate barriers a = b")
    if not a < x0 < b:
        raise ValueError("need a < x0 < b")
    sa, sx, sb = (float(scale_function(deltap, v)) for v in (a, x0, b))
    return (sb - sx) / (sb - sa)


@dataclass
class HittingExperiment:
    deltap: float
    x0: float
    a: float
    b: float
    dt: float = 1e-3
    nPaths: int = 100_000
    seed: int = 0
    bridge: bool = True
    empirical: float | None = None
    stderr: float | None = None
    oracle: float | None = None
    censored: int | None = None
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        keys = ["deltap", "x0", "a", "b", "dt", "nPaths", "seed", "empirical", "stderr", "oracle", "censored"]
        d = asdict(self)
        return {k: d[k] for k in keys}


def _simulate_block(exp: HittingExperiment, g: np.random.Generator, k: int):
    """Run k paths to absorption; returns (hits at a, censored, total steps)."""
    dp, a, b, dt = exp.deltap, exp.a, exp.b, exp.dt
    x = np.full(k, float(exp.x0))
    hit_a = 0
    steps_total = 0.0
    step = 0
    while x.size and step < STEP_CAP:
        done = np.zeros(x.size, dtype=bool)
        for _ in range(min(COMPACT_EVERY, STEP_CAP - step)):
            if dp:
                ax = np.abs(x)
                c = np.maximum(ax, 1.0) ** (2.0 * dp)
                # c'(x) = 2 d' c / x beyond the unit interval, 0 inside
                drift = np.divide((2.0 * dp * dt) * c, x, out=np.zeros_like(x), where=ax > 1.0)
                var = (2.0 * dt) * c
                xn = x + drift + np.sqrt(var) * g.standard_normal(x.size)
            else:
                var = 2.0 * dt
                xn = x + math.sqrt(var) * g.standard_normal(x.size)
            out_a = xn <= a
            out_b = xn >= b
            if exp.bridge:
                # chance that the bridge with frozen local variance touched a
                # barrier between two interior grid values
                u = g.random(x.size)
                inside = ~(out_a | out_b)
                pa = np.exp((x - a) * (xn - a) * (-2.0 / var))
                pb = np.exp((b - x) * (b - xn) * (-2.0 / var))
                touch_a = inside & (u < pa)
                out_a |= touch_a
                out_b |= inside & ~touch_a & (u < pa + pb)
            hit = out_a | out_b
            x = np.where(done, x, np.where(out_a, a, np.where(out_b, b, xn)))
            done |= hit
            step += 1
        if done.any():
            hit_a += int(np.sum(x[done] <= a))
            steps_total += step * int(done.sum())
            x = x[~done]
    censored = int(x.size)
    steps_total += step * censored
    return hit_a, censored, steps_total


def simulate_hitting(exp: HittingExperiment) -> HittingExperiment:
    """Euler-Maruyama estimate of P(hit a before b) with absorbing barriers.

    Paths are processed in fixed blocks of PATH_BLOCK, each with its own
    generator derived from (seed, block index), so results do not depend on
    scheduling. Absorption is checked at grid times and, when ``bridge`` is
    set, also between grid times with the Brownian-bridge crossing
    probability of the frozen local variance 2 c(x) dt.
    """
    _check_deltap(exp.deltap)
    if not exp.dt > 0:
        raise ValueError("dt must be positive")
    if exp.nPaths < MIN_PATHS:
        raise ValueError(f"need at least {MIN_PATHS} paths")
    exp.oracle = hitting_oracle(exp.deltap, exp.a, exp.x0, exp.b)
    hits = cens = 0
    steps = 0.0
    for start, stop, g in rngmod.blocks(exp.seed, "hitting", exp.nPaths, PATH_BLOCK):
        h, c, s = _simulate_block(exp, g, stop - start)
        hits += h
        cens += c
        steps += s
    finished = exp.nPaths - cens
    p = hits / finished if finished else float("nan")
    exp.empirical = p
    exp.stderr = math.sqrt(p * (1 - p) / finished) if finished else float("nan")
    exp.censored = cens
    exp.extra = {"mean_steps": steps / exp.nPaths, "bridge": exp.bridge}
    if cens > MAX_CENSORED * exp.nPaths:
        raise ArithmeticError(f"censored fraction {cens / exp.nPaths:.3%} exceeds {MAX_CENSORED:.0%}")
    return exp


# ---------------------------------------------------------------------------
# Ends transform


def ends_map(alpha: float, x):
    """f(x) = x on [-1, 1] and sign(x) |x|^alpha beyond."""
    x = np.asarray(x, dtype=float)
    a = np.abs(x)
    return np.where(a <= 1.0, x, np.sign(x) * a**alpha)


def ends_map_derivative(alpha: float, x):
    a = np.abs(np.asarray(x, dtype=float))
    return np.where(a <= 1.0, 1.0, alpha * a ** (alpha - 1.0))


def ends_inverse(alpha: float, y):
    y = np.asarray(y, dtype=float)
    a = np.abs(y)
    return np.where(a <= 1.0, y, np.sign(y) * a ** (1.0 / alpha))


@dataclass(frozen=True)
class TestFunction:
    __test__ = False  # not a pytest class
    name: str
    f: object
    df: object
    support: float  # phi vanishes outside [-support, support]


def _bump(c: float, r: float, amp: float = 1.0) -> TestFunction:
    def f(y):
        z = (y - c) / r
        return amp * np.exp(-1.0 / (1.0 - z * z)) if abs(z) < 1 else 0.0

    def df(y):
        z = (y - c) / r
        if abs(z) >= 1:
            return 0.0
        return amp * np.exp(-1.0 / (1.0 - z * z)) * (-2.0 * z / (1.0 - z * z) ** 2) / r

    return TestFunction(f"bump(c={c:g},r={r:g})", f, df, abs(c) + r)


def _gauss_bump(s: float) -> TestFunction:
    """Gaussian times a wide smooth cutoff at |y| = 6s."""
    inner = _bump(0.0, 6 * s)

    def f(y):
        return math.exp(-0.5 * (y / s) ** 2) * inner.f(y) * math.e

    def df(y):
        g = math.exp(-0.5 * (y / s) ** 2)
        return (-y / s**2 * g * inner.f(y) + g * inner.df(y)) * math.e

    return TestFunction(f"gaussian-bump(s={s:g})", f, df, 6 * s)


def _odd_bump() -> TestFunction:
    base = _bump(0.0, 3.0)

    def f(y):
        return y * base.f(y)

    def df(y):
        return base.f(y) + y * base.df(y)

    return TestFunction("odd-bump(r=3)", f, df, 3.0)


def bundled_test_functions() -> list[TestFunction]:
    return [
        _gauss_bump(1.0),
        _bump(0.0, 2.0),
        _bump(1.5, 2.5),
        _bump(-3.0, 2.0),
        _odd_bump(),
    ]


QUAD_EPS = 1e-12


def _quad(fun, lo, hi, pts):
    pts = sorted({p for p in pts if lo < p < hi})
    edges = [lo, *pts, hi]
    total = 0.0
    for u, v in zip(edges, edges[1:]):
        val, err = integrate.quad(fun, u, v, limit=500, epsabs=QUAD_EPS, epsrel=1e-12)
        if not np.isfinite(val) or err > 1e-8 * max(1.0, abs(val)):
            raise ArithmeticError(f"quadrature did not converge on [{u}, {v}] (err {err:.2e})")
        total += val
    return total


def ends_transform_check(d1: float, test_functions=None, relative_tol: float = 1e-6) -> dict:
    """Verify the isometry |Phi|_{2,mu} = |phi|_2 and h(phi) = h_mu(Phi) for
    Phi = phi o f, d mu = f' dx, with alpha = 1/(1 - d1).

    h(phi) is the form of -d/dy (1 v |y|)^(2 d1) d/dy in the y variable
    (where phi lives); the transformed form in x reads
    int_{|x|<=1} Phi'^2 + int_{|x|>1} alpha^(-1) |x|^(alpha-1) Phi'^2
    after substituting y = f(x). For integer alpha = k the density
    f'(x)/alpha = |x|^(k-1) is also compared with the radial measure of
    R^k on a few shells.
    """
    if not 0.5 <= d1 < 1.0:
        raise ValueError("ends transform needs d1 in [1/2, 1)")
    alpha = 1.0 / (1.0 - d1)
    fns = bundled_test_functions() if test_functions is None else list(test_functions)
    rows = []
    ok = True
    for tf in fns:
        Y = tf.support
        X = float(ends_inverse(alpha, Y)) if Y > 1 else Y
        ybreaks = [-1.0, 1.0]
        xbreaks = [-1.0, 1.0]

        def phi2(y):
            return tf.f(y) ** 2

        def Phi2mu(x):
            return tf.f(float(ends_map(alpha, x))) ** 2 * float(ends_map_derivative(alpha, x))

        def energy_y(y):
            return max(1.0, abs(y)) ** (2 * d1) * tf.df(y) ** 2

        def energy_x(x):
            fx = float(ends_map(alpha, x))
            dPhi = tf.df(fx) * float(ends_map_derivative(alpha, x))
            w = 1.0 if abs(x) <= 1.0 else abs(x) ** (alpha - 1.0) / alpha
            return w * dPhi**2

        n_phi = _quad(phi2, -Y, Y, ybreaks)
        n_Phi = _quad(Phi2mu, -X, X, xbreaks)
        h_phi = _quad(energy_y, -Y, Y, ybreaks)
        h_Phi = _quad(energy_x, -X, X, xbreaks)
        iso = abs(n_Phi - n_phi) / n_phi if n_phi else abs(n_Phi)
        form = abs(h_Phi - h_phi) / h_phi if h_phi else abs(h_Phi)
        passed = iso <= relative_tol and form <= relative_tol
        ok &= passed
        rows.append(
            {
                "function": tf.name,
                "norm_phi": n_phi,
                "norm_Phi_mu": n_Phi,
                "isometry_rel_err": iso,
                "form_phi": h_phi,
                "form_Phi_mu": h_Phi,
                "form_rel_err": form,
                "pass": passed,
            }
        )
    out = {"d1": d1, "alpha": alpha, "rows": rows, "tolerance": relative_tol, "pass": ok}
    k = round(alpha)
    if abs(alpha - k) < 1e-12 and k >= 2:
        out["radial"] = radial_measure_check(k)
    return out


def radial_measure_check(k: int, radii=(1.5, 2.0, 4.0)) -> list[dict]:
    """Compare f'(x)/alpha = |x|^(k-1) with |S^(k-1)|^-1 d|B_r|/dr in R^k."""
    sphere = 2 * math.pi ** (k / 2) / math.gamma(k / 2)
    rows = []
    for r in radii:
        weight = float(ends_map_derivative(float(k), r)) / k
        h = 1e-5 * r
        ball = lambda s: math.pi ** (k / 2) / math.gamma(k / 2 + 1) * s**k  # noqa: E731
        shell = (ball(r + h) - ball(r - h)) / (2 * h) / sphere
        rows.append({"r": r, "weight": weight, "expected": r ** (k - 1), "shell_density": shell})
    return rows
