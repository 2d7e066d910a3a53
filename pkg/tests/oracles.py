"""Independent oracles used across the test suite.

Everything here recomputes package quantities by a different route:
exhaustive 3^n enumeration, finite differences, high-precision series
differentiation, dense-grid scans and plain trapezoid quadrature.  Oracles
deliberately avoid the package's own code paths except for elementary inputs.
"""

from __future__ import annotations

import math
from itertools import product

import numpy as np

from begrates.model import ModelParams


def brute_configs(params: ModelParams, n: int):
    """All 3^n configurations with their normalised probabilities."""
    beta, K = params.beta, params.K
    cfgs = list(product((-1, 0, 1), repeat=n))
    logw = []
    for cfg in cfgs:
        s = sum(cfg)
        M = sum(1 for v in cfg if v != 0)
        logw.append(-beta * M + beta * K * s * s / n)
    best = max(logw)
    weights = [math.exp(v - best) for v in logw]
    total = math.fsum(weights)
    return cfgs, [w / total for w in weights]


def brute_joint_law(params: ModelParams, n: int) -> dict[tuple[int, int], float]:
    cfgs, probs = brute_configs(params, n)
    out: dict[tuple[int, int], float] = {}
    for cfg, p in zip(cfgs, probs):
        s = sum(cfg)
        M = sum(1 for v in cfg if v != 0)
        out[(s, M)] = out.get((s, M), 0.0) + p
    return out


def brute_moment(params: ModelParams, n: int, gamma: float, k: int) -> float:
    cfgs, probs = brute_configs(params, n)
    scale = n ** (1.0 - gamma)
    return math.fsum(p * (sum(cfg) / scale) ** k for cfg, p in zip(cfgs, probs))


def conditional_law(params: ModelParams, n: int, u: int) -> tuple[float, float, float]:
    """Exact 3-point resampling law (pi_-1, pi_0, pi_+1) given the rest sums to u."""
    beta, K = params.beta, params.K
    ws = [math.exp(-beta * l * l + beta * K * (l * l + 2 * l * u) / n) for l in (-1, 0, 1)]
    tot = math.fsum(ws)
    return ws[0] / tot, ws[1] / tot, ws[2] / tot


def brute_step_moments(params: ModelParams, n: int, gamma: float):
    """Exhaustive E[W-W'|config] and E[(W-W')^2|config], grouped by (s, M).

    Verifies along the way that both are constant on each (s, M) class.
    """
    cfgs, probs = brute_configs(params, n)
    scale = n ** (1.0 - gamma)
    by_class: dict[tuple[int, int], tuple[float, float]] = {}
    weights: dict[tuple[int, int], float] = {}
    for cfg, p in zip(cfgs, probs):
        s = sum(cfg)
        M = sum(1 for v in cfg if v != 0)
        m1 = 0.0
        m2 = 0.0
        for t in cfg:
            pm, pz, pp = conditional_law(params, n, s - t)
            mean = pp - pm
            second = (t + 1) ** 2 * pm + t * t * pz + (t - 1) ** 2 * pp
            m1 += t - mean
            m2 += second
        vals = (m1 / (n * scale), m2 / (n * scale * scale))
        key = (s, M)
        if key in by_class:
            old = by_class[key]
            assert abs(old[0] - vals[0]) < 1e-13 and abs(old[1] - vals[1]) < 1e-13
        by_class[key] = vals
        weights[key] = weights.get(key, 0.0) + p
    return by_class, weights


def brute_variance_term(params: ModelParams, n: int, gamma: float) -> float:
    """Var(E[(W-W')^2 | W]) by exhaustive enumeration (condition on s)."""
    by_class, weights = brute_step_moments(params, n, gamma)
    by_s_num: dict[int, float] = {}
    by_s_den: dict[int, float] = {}
    for (s, M), (m1, m2) in by_class.items():
        w = weights[(s, M)]
        by_s_num[s] = by_s_num.get(s, 0.0) + w * m2
        by_s_den[s] = by_s_den.get(s, 0.0) + w
    mean = math.fsum(by_s_num.values())
    var = math.fsum(
        by_s_den[s] * (by_s_num[s] / by_s_den[s] - mean) ** 2 for s in by_s_num
    )
    return var


def brute_pair_covariance(params: ModelParams, n: int) -> float:
    """Cov(w_1^2, w_2^2) directly from the 3^n enumeration."""
    cfgs, probs = brute_configs(params, n)
    e1 = math.fsum(p * cfg[0] ** 2 for cfg, p in zip(cfgs, probs))
    e12 = math.fsum(p * cfg[0] ** 2 * cfg[1] ** 2 for cfg, p in zip(cfgs, probs))
    return e12 - e1 * e1


def central_second_derivative(f, x: float, h: float) -> float:
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)


def central_fourth_derivative(f, x: float, h: float) -> float:
    return (
        f(x + 2 * h) - 4.0 * f(x + h) + 6.0 * f(x) - 4.0 * f(x - h) + f(x - 2 * h)
    ) / h**4


def richardson_second_derivative(f, x: float, h: float = 0.02) -> float:
    """O(h^4) second derivative: Richardson over two central stencils."""
    coarse = central_second_derivative(f, x, h)
    fine = central_second_derivative(f, x, h / 2.0)
    return (4.0 * fine - coarse) / 3.0


def richardson_fourth_derivative(f, x: float, h: float = 0.05) -> float:
    """O(h^4) fourth derivative: Richardson over two 5-point stencils."""
    coarse = central_fourth_derivative(f, x, h)
    fine = central_fourth_derivative(f, x, h / 2.0)
    return (4.0 * fine - coarse) / 3.0


def series_g6_oracle(beta: float, K: float) -> float:
    """G^(6)(0) by high-precision Taylor differentiation of the cumulant."""
    import mpmath as mp

    with mp.workdps(50):
        b = mp.mpf(beta)

        def c(t):
            return mp.log((1 + mp.e**-b * (mp.e**t + mp.e**-t)) / (1 + 2 * mp.e**-b))

        c6 = mp.taylor(c, 0, 6)[6] * mp.factorial(6)
        return float(-((2 * mp.mpf(beta) * mp.mpf(K)) ** 6) * c6)


def grid_scan_kolmogorov(w: np.ndarray, probs: np.ndarray, cdf, lo: float, hi: float,
                         points: int = 1_000_000) -> float:
    """Dense-grid sup scan of |F_n - F| (lower bound on the true sup).

    The grid is the uniform mesh refined with the atoms and the floats just
    below them, so the left-limit candidates at the jumps are resolved.
    """
    grid = np.concatenate([
        np.linspace(lo, hi, points),
        w,
        np.nextafter(w, -np.inf),
    ])
    grid.sort()
    fn = np.searchsorted(w, grid, side="right")
    cum = np.concatenate(([0.0], np.cumsum(probs)))
    return float(np.abs(cum[fn] - cdf(grid)).max())


def trapezoid_moment(b1: float, b2: float, b3: float, k: int, T: float,
                     points: int = 10_000_001) -> float:
    """E[X^k] for exp(-(b1 x^2 + b2 x^4 + b3 x^6)) by plain trapezoid rule."""
    xs = np.linspace(-T, T, points)
    pdf = np.exp(-(b1 * xs**2 + b2 * xs**4 + b3 * xs**6))
    z = np.trapezoid(pdf, xs)
    return float(np.trapezoid(xs**k * pdf, xs) / z)


def gaussian_stein_solution(z: float, x: np.ndarray) -> np.ndarray:
    """Closed-form Stein solution for the standard normal (scipy oracle)."""
    from scipy.stats import norm

    x = np.asarray(x, dtype=float)
    return np.where(
        x <= z,
        norm.cdf(x) * norm.sf(z),
        norm.cdf(z) * norm.sf(x),
    ) / norm.pdf(x)
