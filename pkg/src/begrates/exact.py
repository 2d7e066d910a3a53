"""Exact finite-n law of the total spin.

The Hamiltonian depends on a configuration only through the spin sum s and
the number M of nonzero spins, so the full law is enumerable over the pairs
(s, M) with |s| <= M <= n and M = s (mod 2):

    log w(s, M) = log multinomial(n; n+, n-, n0) - beta*M + beta*K*s^2/n

with n+ = (M+s)/2, n- = (M-s)/2, n0 = n-M.  All weights are handled in log
space with a single global normalisation.  The cost is O(n^2) instead of 3^n.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Iterator, Mapping

import numpy as np
from scipy.special import gammaln, ndtr

from .errors import CapExceededError, ValidationError
from .model import ModelParams

__all__ = [
    "DEFAULT_N_CAP",
    "JointLaw",
    "MomentSet",
    "build_joint_law",
    "moment",
    "moment_set",
    "kolmogorov_distance",
    "hs_check",
    "pair_covariance",
    "brute_force_law",
    "tv_distance",
    "save_law",
    "load_law",
]

DEFAULT_N_CAP = 20000


@dataclass
class JointLaw:
    """Probability law of (s, M) under the finite-n Gibbs measure.

    Slices are stored per spin sum s; the slice for s and -s share the same
    array (the law is exactly symmetric in s).  ``log_partition`` is the log
    normalising constant relative to the uniform product measure on
    {-1,0,1}^n.
    """

    n: int
    params: ModelParams
    log_partition: float
    s_values: np.ndarray = field(repr=False)
    s_probs: np.ndarray = field(repr=False)
    _slices: list[np.ndarray] = field(repr=False)  # index |s|: probs over M

    def M_values(self, s: int) -> np.ndarray:
        return np.arange(abs(s), self.n + 1, 2)

    def slice_probs(self, s: int) -> np.ndarray:
        return self._slices[abs(s)]

    def prob(self, s: int, M: int) -> float:
        if abs(s) > self.n or M < abs(s) or M > self.n or (M - s) % 2 != 0:
            return 0.0
        return float(self._slices[abs(s)][(M - abs(s)) // 2])

    def iter_slices(self) -> Iterator[tuple[int, np.ndarray, np.ndarray]]:
        """Yield (s, M array, probability array) for every s in [-n, n]."""
        for s in range(-self.n, self.n + 1):
            yield s, self.M_values(s), self._slices[abs(s)]

    def atoms(self) -> dict[tuple[int, int], float]:
        out: dict[tuple[int, int], float] = {}
        for s, Ms, ps in self.iter_slices():
            for M, p in zip(Ms, ps):
                out[(s, int(M))] = float(p)
        return out

    def w_values(self, gamma: float) -> np.ndarray:
        return self.s_values / float(self.n) ** (1.0 - gamma)

    def count_moments(self) -> tuple[float, float]:
        """(E[M], E[M^2]) of the nonzero-spin count."""
        em = 0.0
        em2 = 0.0
        for s in range(0, self.n + 1):
            Ms = self.M_values(s)
            ps = self._slices[s]
            mult = 2.0 if s > 0 else 1.0
            em += mult * float(np.dot(ps, Ms))
            em2 += mult * float(np.dot(ps, Ms.astype(float) ** 2))
        return em, em2


def build_joint_law(params: ModelParams, n: int, *, cap: int = DEFAULT_N_CAP) -> JointLaw:
    """Enumerate the exact (s, M) law at size n.

    Raises CapExceededError above ``cap`` (the atom count grows like n^2/4);
    larger sizes should fall back to the Monte Carlo sampler.
    """
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    if n > cap:
        raise CapExceededError(f"n={n} exceeds the enumeration cap {cap}")
    beta, K = params.beta, params.K
    lf = gammaln(np.arange(n + 2, dtype=np.float64))  # lf[m] = log((m-1)!)
    log_n_fact = float(lf[n + 1])
    bks = beta * K / n

    log_slices: list[np.ndarray] = []
    best = -np.inf
    for s in range(0, n + 1):
        Ms = np.arange(s, n + 1, 2)
        npl = (Ms + s) // 2
        nmi = (Ms - s) // 2
        logc = log_n_fact - lf[npl + 1] - lf[nmi + 1] - lf[n - Ms + 1]
        lw = logc - beta * Ms + bks * s * s
        log_slices.append(lw)
        if lw.size:
            best = max(best, float(lw.max()))

    total = 0.0
    for s, lw in enumerate(log_slices):
        mult = 2.0 if s > 0 else 1.0
        total += mult * float(np.exp(lw - best).sum())
    slices = [np.exp(lw - best) / total for lw in log_slices]
    log_partition = best + math.log(total) - n * math.log(3.0)

    s_values = np.arange(-n, n + 1)
    s_probs = np.empty(2 * n + 1)
    for s in range(0, n + 1):
        ps = float(slices[s].sum())
        s_probs[n + s] = ps
        s_probs[n - s] = ps
    return JointLaw(
        n=n,
        params=params,
        log_partition=log_partition,
        s_values=s_values,
        s_probs=s_probs,
        _slices=slices,
    )


# ---------------------------------------------------------------------------
# moments


def moment(law: JointLaw, gamma: float, k: int) -> float:
    """E[W^k] for W = S_n / n^(1-gamma), accumulated with exact summation."""
    _check_gamma(gamma)
    if not (0 <= k <= 12):
        raise ValidationError(f"moment order must lie in [0, 12], got {k}")
    if k == 0:
        return 1.0
    w = law.w_values(gamma)
    return math.fsum(law.s_probs * w**k)


@dataclass(frozen=True)
class MomentSet:
    """Moments of the rescaled spin sum at a fixed gamma."""

    gamma: float
    moments: dict[int, float]

    def __getitem__(self, k: int) -> float:
        return self.moments[k]


def moment_set(law: JointLaw, gamma: float, orders: tuple[int, ...] = (2, 4, 6)) -> MomentSet:
    return MomentSet(gamma=gamma, moments={k: moment(law, gamma, k) for k in orders})


def _check_gamma(gamma: float) -> None:
    if not (0.0 < gamma <= 0.5):
        raise ValidationError(f"gamma must lie in (0, 1/2], got {gamma!r}")


# ---------------------------------------------------------------------------
# Kolmogorov distance


def kolmogorov_distance(
    law: JointLaw,
    gamma: float,
    cdf: Callable[[np.ndarray], np.ndarray],
    *,
    cdf_left: Callable[[np.ndarray], np.ndarray] | None = None,
) -> float:
    """sup_z |P(W <= z) - F(z)| against a distribution function F.

    Exact for the discrete law: the supremum is attained at an atom of W or
    at its left limit, so it suffices to compare F with the step CDF at the
    jump points.  ``cdf_left`` supplies left limits of F when F itself has
    jumps (it defaults to F, which is correct for continuous F).
    """
    _check_gamma(gamma)
    w = law.w_values(gamma)
    fn = np.cumsum(law.s_probs)
    fn_prev = np.concatenate(([0.0], fn[:-1]))
    f_at = np.asarray(_eval_cdf(cdf, w), dtype=float)
    f_left = f_at if cdf_left is None else np.asarray(_eval_cdf(cdf_left, w), dtype=float)
    d = np.maximum(np.abs(fn - f_at), np.abs(f_left - fn_prev))
    return float(d.max())


def _eval_cdf(cdf: Callable, xs: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(cdf(xs), dtype=float)
        if out.shape == xs.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(cdf(float(x))) for x in xs])


def step_cdf_pair(law: JointLaw, gamma: float) -> tuple[Callable, Callable]:
    """Right-continuous CDF of W and its left-limit evaluator."""
    w = law.w_values(gamma)
    fn = np.cumsum(law.s_probs)

    def right(t):
        idx = np.searchsorted(w, np.atleast_1d(t), side="right")
        vals = np.concatenate(([0.0], fn))[idx]
        return vals if np.ndim(t) else float(vals[0])

    def left(t):
        idx = np.searchsorted(w, np.atleast_1d(t), side="left")
        vals = np.concatenate(([0.0], fn))[idx]
        return vals if np.ndim(t) else float(vals[0])

    return right, left


# ---------------------------------------------------------------------------
# Gaussian smoothing identity


def hs_check(
    params: ModelParams,
    n: int,
    gamma: float,
    *,
    grid_points: int = 2001,
    span: float = 8.0,
    law: JointLaw | None = None,
) -> float:
    """Sup CDF gap of the Gaussian-smoothing identity for W.

    Convolving the exact law of W with an independent centred Gaussian of
    variance 1/(2 beta K n^(1-2 gamma)) yields, exactly, the distribution with
    Lebesgue density proportional to exp(-n G(y / n^gamma)).  Both CDFs are
    computed independently (atom sum of normal CDFs versus quadrature of the
    G-density) and compared on a grid of ``grid_points`` spanning ``span``
    standard widths; the returned sup reflects quadrature and grid error only.
    """
    _check_gamma(gamma)
    if law is None:
        law = build_joint_law(params, n)
    w = law.w_values(gamma)
    noise_var = 1.0 / (params.two_beta_K * float(n) ** (1.0 - 2.0 * gamma))
    sigma = math.sqrt(noise_var)
    width = math.sqrt(moment(law, gamma, 2) + noise_var)
    ts = np.linspace(-span * width, span * width, grid_points)

    # smoothed atom law
    cdf1 = np.zeros_like(ts)
    chunk = max(1, 4_000_000 // max(1, ts.size))
    for i in range(0, w.size, chunk):
        z = (ts[None, :] - w[i : i + chunk, None]) / sigma
        cdf1 += law.s_probs[i : i + chunk] @ ndtr(z)

    # density proportional to exp(-n G(y / n^gamma))
    scale = float(n) ** gamma
    beta, K = params.beta, params.K

    def neg_log_kernel(y: np.ndarray) -> np.ndarray:
        x = np.asarray(y, dtype=float) / scale
        t = params.two_beta_K * x
        c = np.logaddexp(0.0, np.logaddexp(t - beta, -t - beta)) - np.logaddexp(
            0.0, math.log(2.0) - beta
        )
        return n * (beta * K * x * x - c)

    lo, hi = float(ts[0]), float(ts[-1])
    # widen until the kernel is negligible relative to its minimum
    ref = float(neg_log_kernel(np.linspace(lo, hi, 513)).min())
    while float(neg_log_kernel(np.array([lo]))[0]) - ref < 760.0:
        lo -= width
    while float(neg_log_kernel(np.array([hi]))[0]) - ref < 760.0:
        hi += width
    xs = np.unique(np.concatenate((np.linspace(lo, hi, 4097), ts)))
    nodes, wts = np.polynomial.legendre.leggauss(16)
    a, b = xs[:-1], xs[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    X = mid[:, None] + half[:, None] * nodes[None, :]
    V = np.exp(-(neg_log_kernel(X) - ref))
    seg = (V * wts[None, :]).sum(axis=1) * half
    cum = np.concatenate(([0.0], np.cumsum(seg)))
    cum /= cum[-1]
    cdf2 = cum[np.searchsorted(xs, ts)]

    return float(np.abs(cdf1 - cdf2).max())


# ---------------------------------------------------------------------------
# pair covariance


def pair_covariance(params: ModelParams, n: int, *, law: JointLaw | None = None) -> float:
    """Cov(w_i^2, w_j^2) for i != j, exactly, via exchangeability.

    Sum(w_i^2) = M and Sum_{i != j} w_i^2 w_j^2 = M^2 - M, so the covariance
    equals (E[M^2] - E[M]) / (n(n-1)) - (E[M]/n)^2.
    """
    if n < 2:
        raise ValidationError("pair covariance needs n >= 2")
    if law is None:
        law = build_joint_law(params, n)
    em, em2 = law.count_moments()
    return (em2 - em) / (n * (n - 1.0)) - (em / n) ** 2


# ---------------------------------------------------------------------------
# brute-force oracle (exponential in n; used for cross-checks)


def brute_force_law(params: ModelParams, n: int) -> dict[tuple[int, int], float]:
    """Full 3^n enumeration, aggregated to (s, M).  Only sensible for n <= 12."""
    if n > 12:
        raise ValidationError(f"brute force limited to n <= 12, got {n}")
    beta, K = params.beta, params.K
    logs: dict[tuple[int, int], list[float]] = {}
    for cfg in product((-1, 0, 1), repeat=n):
        s = sum(cfg)
        M = sum(1 for v in cfg if v != 0)
        logs.setdefault((s, M), []).append(-beta * M + beta * K * s * s / n)
    best = max(v for vs in logs.values() for v in vs)
    raw = {k: math.fsum(math.exp(v - best) for v in vs) for k, vs in logs.items()}
    total = math.fsum(raw.values())
    return {k: v / total for k, v in raw.items()}


def tv_distance(
    a: Mapping[tuple[int, int], float], b: Mapping[tuple[int, int], float]
) -> float:
    keys = set(a) | set(b)
    return 0.5 * math.fsum(abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in keys)


# ---------------------------------------------------------------------------
# serialization (atom CSV plus JSON header), for caching between CLI runs


def save_law(law: JointLaw, csv_path: str, header_path: str) -> None:
    with open(header_path, "w") as fh:
        json.dump(
            {
                "n": law.n,
                "beta": law.params.beta,
                "K": law.params.K,
                "log_partition": law.log_partition,
            },
            fh,
            indent=2,
        )
        fh.write("\n")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["s", "M", "probability"])
        for s, Ms, ps in law.iter_slices():
            for M, p in zip(Ms, ps):
                writer.writerow([s, int(M), repr(float(p))])


def load_law(csv_path: str, header_path: str) -> JointLaw:
    with open(header_path) as fh:
        header = json.load(fh)
    n = int(header["n"])
    params = ModelParams(float(header["beta"]), float(header["K"]))
    slices = [np.zeros(len(np.arange(s, n + 1, 2))) for s in range(0, n + 1)]
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            s, M, p = int(row[0]), int(row[1]), float(row[2])
            if s < 0:
                continue  # the negative half mirrors the positive one
            slices[s][(M - s) // 2] = p
    s_values = np.arange(-n, n + 1)
    s_probs = np.empty(2 * n + 1)
    for s in range(0, n + 1):
        ps = float(slices[s].sum())
        s_probs[n + s] = ps
        s_probs[n - s] = ps
    return JointLaw(
        n=n,
        params=params,
        log_partition=float(header["log_partition"]),
        s_values=s_values,
        s_probs=s_probs,
        _slices=slices,
    )
