"""Exchangeable-pair machinery and exact evaluation of the Kolmogorov bounds.

The pair (W, W') resamples one uniformly chosen spin from its exact
conditional law.  Everything the abstract bounds consume is computable
exactly from the (s, M) law: conditional increment moments per class, the
regression residual R, Var(E[(W-W')^2 | W]) and the truncated tail
expectation.  Computations stream over s-slices so memory stays O(n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cases import CaseSpec, regression_at
from .density import PolyDensity, SteinConstants, normalize_density
from .errors import ValidationError
from .exact import JointLaw, kolmogorov_distance, moment
from .model import f_single

__all__ = [
    "StepMomentTable",
    "RegressionDecomposition",
    "BoundReport",
    "conditional_step_moments",
    "conditional_mean_sandwich_gap",
    "regression_decompose",
    "variance_term",
    "variance_term_classwise",
    "evaluate_bound",
    "normal_bound",
    "max_increment",
]


def _conditional_triplet(beta: float, K: float, n: int, u: np.ndarray):
    """Exact 3-point law of a resampled spin given the other spins sum to u.

    Weights exp(-beta l^2 + beta K (l^2 + 2 l u)/n) for l in {-1, 0, +1},
    normalised.  Returns (pi_minus, pi_zero, pi_plus) as arrays over u.
    """
    u = np.asarray(u, dtype=float)
    base = -beta + beta * K / n
    wp = np.exp(base + 2.0 * beta * K * u / n)
    wm = np.exp(base - 2.0 * beta * K * u / n)
    tot = 1.0 + wp + wm
    return wm / tot, 1.0 / tot, wp / tot


def max_increment(n: int, gamma: float) -> float:
    """Almost-sure bound on |W - W'|: one resampled spin moves by at most 2."""
    return 2.0 / float(n) ** (1.0 - gamma)


@dataclass
class StepMomentTable:
    """Materialised per-class conditional increment moments.

    For every (s, M) class: mean1 = E[W - W' | class] and
    sec = E[(W - W')^2 | class].  Stored for s >= 0 only; the mean is odd in
    s and the second moment even, which ``lookup`` applies.
    """

    n: int
    gamma: float
    mean1: list[np.ndarray] = field(repr=False)  # index |s|, per-M arrays
    sec: list[np.ndarray] = field(repr=False)

    def lookup(self, s: int, M: int) -> tuple[float, float]:
        j = (M - abs(s)) // 2
        sign = 1.0 if s >= 0 else -1.0
        return sign * float(self.mean1[abs(s)][j]), float(self.sec[abs(s)][j])


def _slice_step_moments(law: JointLaw, gamma: float, s: int):
    """Per-class (mean1, sec) arrays over M for one nonnegative spin sum s.

    Site groups per class: n+ spins at +1 (each sees u = s - 1), n- at -1
    (u = s + 1), n0 at 0 (u = s).
    """
    n = law.n
    beta, K = law.params.beta, law.params.K
    scale = float(n) ** (1.0 - gamma)
    Ms = law.M_values(s)
    npl = (Ms + s) // 2
    nmi = (Ms - s) // 2
    nz = n - Ms
    us = np.array([s - 1.0, s + 1.0, s])
    pm, pz, pp = _conditional_triplet(beta, K, n, us)
    e_mean = pp - pm  # E[w'] at each of the three u values
    # E[(t - w')^2] for t = +1, -1, 0
    sq_p = 4.0 * pm[0] + pz[0]  # t=+1: (1-l)^2
    sq_m = 4.0 * pp[1] + pz[1]  # t=-1: (l+1)^2
    sq_z = pp[2] + pm[2]  # t=0: l^2
    mean1 = (s - (npl * e_mean[0] + nmi * e_mean[1] + nz * e_mean[2])) / (n * scale)
    sec = (npl * sq_p + nmi * sq_m + nz * sq_z) / (n * scale * scale)
    return Ms, mean1, sec


def conditional_step_moments(law: JointLaw, gamma: float) -> StepMomentTable:
    """Exact E[W - W'|class] and E[(W - W')^2|class] for every (s, M) class.

    Stored for s >= 0; the conditional mean is odd in s and the second moment
    even, which ``lookup`` applies.  Memory is O(n^2/4); prefer the streaming
    consumers below at large n.
    """
    mean1: list[np.ndarray] = []
    sec: list[np.ndarray] = []
    for s in range(0, law.n + 1):
        _, m1, m2 = _slice_step_moments(law, gamma, s)
        mean1.append(m1)
        sec.append(m2)
    return StepMomentTable(n=law.n, gamma=gamma, mean1=mean1, sec=sec)


def conditional_mean_sandwich_gap(law: JointLaw) -> float:
    """Worst violation of the e^{+-2 beta K / n} sandwich around f_single.

    The exact conditional mean of a resampled spin at S^i = u lies between
    e^{-2 beta K/n} f(u/n) and e^{2 beta K/n} f(u/n); returns the largest
    amount (over all u reachable at this n) by which that fails.  Zero up to
    roundoff when the construction is correct.
    """
    n = law.n
    beta, K = law.params.beta, law.params.K
    us = np.arange(-n, n + 1, dtype=float)
    pm, _, pp = _conditional_triplet(beta, K, n, us)
    exact = pp - pm
    f = np.array([f_single(law.params, float(u) / n) for u in us])
    lo = np.minimum(f * math.exp(-2.0 * beta * K / n), f * math.exp(2.0 * beta * K / n))
    hi = np.maximum(f * math.exp(-2.0 * beta * K / n), f * math.exp(2.0 * beta * K / n))
    gap = np.maximum(lo - exact, exact - hi)
    return float(gap.max())


# ---------------------------------------------------------------------------
# regression decomposition


@dataclass(frozen=True)
class RegressionDecomposition:
    """Exact residual statistics of E[W'|F] = W + lambda psi(W) - R.

    psi(x) = -(q1 x + q3 x^3 + q5 x^5).  R is defined as the residual, so the
    reconstruction is an identity; the testable content is the size of R.
    ``fdiff_max`` isolates the part of R coming from replacing f(S^i/n) by
    f(S/n); it obeys |.| <= 2 beta K n^(gamma-2) exactly.
    """

    gamma: float
    lam: float
    psi_coeffs: tuple[float, float, float]
    remainder_max: float
    remainder_l2: float
    fdiff_max: float
    fdiff_envelope: float

    @property
    def sigma2(self) -> float:
        """1/q1; the regression variance parameter in the Gaussian regime."""
        q1 = self.psi_coeffs[0]
        if q1 == 0.0:
            raise ValidationError("sigma2 requires an active linear coefficient")
        return 1.0 / q1


def regression_decompose(law: JointLaw, gamma: float, case: CaseSpec) -> RegressionDecomposition:
    n = law.n
    beta, K = law.params.beta, law.params.K
    lam, (q1, q3, q5) = regression_at(case, n)
    scale = float(n) ** (1.0 - gamma)

    r_max = 0.0
    r_l2 = 0.0
    fd_max = 0.0
    f_cache = {u: f_single(law.params, u / n) for u in range(-n - 1, n + 2)}
    for s in range(0, n + 1):
        Ms, m1, _ = _slice_step_moments(law, gamma, s)
        w = s / scale
        drift = lam * (q1 * w + q3 * w**3 + q5 * w**5)
        resid = m1 - drift
        ps = law.slice_probs(s)
        mult = 2.0 if s > 0 else 1.0  # the residual is odd in s; R^2 is even
        r_max = max(r_max, float(np.abs(resid).max(initial=0.0)))
        r_l2 += mult * float(np.dot(ps, resid * resid))
        npl = (Ms + s) // 2
        nmi = (Ms - s) // 2
        fd = (npl * (f_cache[s - 1] - f_cache[s]) + nmi * (f_cache[s + 1] - f_cache[s])) / (
            n * scale
        )
        fd_max = max(fd_max, float(np.abs(fd).max(initial=0.0)))

    return RegressionDecomposition(
        gamma=gamma,
        lam=lam,
        psi_coeffs=(q1, q3, q5),
        remainder_max=r_max,
        remainder_l2=math.sqrt(r_l2),
        fdiff_max=fd_max,
        fdiff_envelope=2.0 * beta * K * float(n) ** (gamma - 2.0),
    )


# ---------------------------------------------------------------------------
# variance of the conditional second moment


def variance_term(law: JointLaw, gamma: float) -> float:
    """Var(E[(W - W')^2 | W]), exactly.

    W generates the same sigma-field as s, so the (s, M) conditional second
    moments are first collapsed to s-classes through p(M | s).
    """
    n = law.n
    h_by_s = np.empty(n + 1)
    for s in range(0, n + 1):
        _, _, sec = _slice_step_moments(law, gamma, s)
        ps = law.slice_probs(s)
        tot = float(ps.sum())
        h_by_s[s] = float(np.dot(ps, sec)) / tot if tot > 0 else 0.0
    idx = np.abs(law.s_values)
    h = h_by_s[idx]
    mean = float(np.dot(law.s_probs, h))
    return max(0.0, float(np.dot(law.s_probs, (h - mean) ** 2)))


def variance_term_classwise(law: JointLaw, gamma: float) -> float:
    """Var(E[(W - W')^2 | F]) over the full (s, M) classes (diagnostic).

    At least as large as ``variance_term`` by conditional Jensen.
    """
    n = law.n
    total = 0.0
    mean = 0.0
    for s in range(0, n + 1):
        _, _, sec = _slice_step_moments(law, gamma, s)
        ps = law.slice_probs(s)
        mult = 2.0 if s > 0 else 1.0
        mean += mult * float(np.dot(ps, sec))
        total += mult * float(np.dot(ps, sec * sec))
    return max(0.0, total - mean * mean)


# ---------------------------------------------------------------------------
# the bounds


@dataclass(frozen=True)
class BoundReport:
    """Itemised Kolmogorov bound next to the exact distance it dominates."""

    kind: str  # "general" or "normal"
    case_id: str
    n: int
    gamma: float
    lam: float
    a_halfwidth: float
    terms: dict[str, float]
    total: float
    exact_dk: float
    drift_scale: float  # E[W * (-psi(W))], the Stein-equation scaling
    constants: dict[str, float]
    grid_spec: dict | None

    def dominates(self) -> bool:
        return self.total >= self.exact_dk

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "case_id": self.case_id,
            "n": self.n,
            "gamma": self.gamma,
            "lambda": self.lam,
            "A": self.a_halfwidth,
            "terms": dict(self.terms),
            "total": self.total,
            "exact_dk": self.exact_dk,
            "drift_scale": self.drift_scale,
            "constants": dict(self.constants),
            "grid_spec": self.grid_spec,
        }


def _tail_expectation(law: JointLaw, gamma: float, A: float) -> float:
    """E[(W - W')^2 ; |W - W'| >= A], exactly.

    Increment values are (t - l)/n^(1-gamma) with t the removed and l the
    resampled spin; |t - l| takes values 0, 1, 2.
    """
    n = law.n
    beta, K = law.params.beta, law.params.K
    scale = float(n) ** (1.0 - gamma)
    thresh = A * scale  # compare |t - l| against this
    total = 0.0
    for s in range(0, n + 1):
        Ms = law.M_values(s)
        npl = (Ms + s) // 2
        nmi = (Ms - s) // 2
        nz = n - Ms
        us = np.array([s - 1.0, s + 1.0, s])
        pm, pz, pp = _conditional_triplet(beta, K, n, us)
        # per group: sum over l of (t-l)^2 pi_l 1{|t-l| >= thresh}
        def g(diffs, probs):
            acc = 0.0
            for dlt, pr in zip(diffs, probs):
                if abs(dlt) >= thresh - 1e-15:
                    acc += dlt * dlt * pr
            return acc

        gp = g((2.0, 1.0, 0.0), (pm[0], pz[0], pp[0]))  # t=+1 vs l=-1,0,+1
        gm = g((2.0, 1.0, 0.0), (pp[1], pz[1], pm[1]))  # t=-1 vs l=+1,0,-1
        gz = g((1.0, 1.0, 0.0), (pp[2], pm[2], pz[2]))  # t=0 vs l=+1,-1,0
        per_class = (npl * gp + nmi * gm + nz * gz) / (n * scale * scale)
        ps = law.slice_probs(s)
        mult = 2.0 if s > 0 else 1.0
        total += mult * float(np.dot(ps, per_class))
    return total


def evaluate_bound(
    law: JointLaw,
    gamma: float,
    case: CaseSpec,
    density: PolyDensity,
    consts: SteinConstants,
    A: float | None = None,
) -> BoundReport:
    """General-density Kolmogorov bound, every term exact under the law.

    The Stein equation for the comparison density is scaled by
    c = E[W(-psi(W))], so the density-level envelopes d1..d4 enter divided
    by c.  The default half-width A = n^(gamma-1) matches the exponent
    bookkeeping of the rate proofs; note the increment |W - W'| reaches
    2 n^(gamma-1), so the tail term only vanishes for A above that.
    """
    n = law.n
    if A is None:
        A = float(n) ** (gamma - 1.0)
    if A <= 0:
        raise ValidationError("A must be positive")
    decomp = regression_decompose(law, gamma, case)
    lam = decomp.lam
    q1, q3, q5 = decomp.psi_coeffs

    m = {k: moment(law, gamma, k) for k in (2, 4, 6)}
    c = q1 * m[2] + q3 * m[4] + q5 * m[6]
    if not (c > 0.0):
        raise ValidationError(f"drift scale E[W(-psi(W))] = {c!r} must be positive")
    d1, d2, d3, d4 = consts.d1 / c, consts.d2 / c, consts.d3 / c, consts.d4 / c

    var_cond = variance_term(law, gamma)
    w = law.w_values(gamma)
    e_abs_psi = math.fsum(law.s_probs * np.abs(q1 * w + q3 * w**3 + q5 * w**5))
    tail = _tail_expectation(law, gamma, A)

    terms = {
        "variance_term": d2 / (2.0 * lam) * math.sqrt(var_cond),
        "remainder_term": (d1 + d2 * math.sqrt(m[2]) + 1.5 * A)
        * decomp.remainder_l2
        / lam,
        "cube_term": d4 * A**3 / (4.0 * lam),
        "psi_term": 1.5 * A * e_abs_psi,
        "tail_term": d3 / (2.0 * lam) * tail,
    }
    total = math.fsum(terms.values())
    exact_dk = kolmogorov_distance(law, gamma, density.cdf_at_sorted)
    return BoundReport(
        kind="general",
        case_id=case.case_id,
        n=n,
        gamma=gamma,
        lam=lam,
        a_halfwidth=A,
        terms=terms,
        total=total,
        exact_dk=exact_dk,
        drift_scale=c,
        constants={"d1": consts.d1, "d2": consts.d2, "d3": consts.d3, "d4": consts.d4},
        grid_spec=consts.grid_spec,
    )


def normal_bound(
    law: JointLaw,
    gamma: float,
    case: CaseSpec,
    A: float | None = None,
) -> BoundReport:
    """Fully explicit bound against N(0, E[W^2]) for linear-regression cases.

    Valid when psi is linear (psi(x) = -x/sigma^2) and requires the a.s.
    increment bound |W - W'| <= A, i.e. A >= 2 n^(gamma-1).
    """
    n = law.n
    inc = max_increment(n, gamma)
    if A is None:
        A = inc * (1.0 + 1e-9)
    if A < inc:
        raise ValidationError(
            f"normal bound requires A >= {inc!r} (the a.s. increment bound), got {A!r}"
        )
    decomp = regression_decompose(law, gamma, case)
    q1, q3, q5 = decomp.psi_coeffs
    if q3 != 0.0 or q5 != 0.0 or q1 == 0.0:
        raise ValidationError("normal bound needs a purely linear regression drift")
    lam = decomp.lam
    sigma2 = 1.0 / q1
    ew2 = moment(law, gamma, 2)
    rt = math.sqrt(ew2)
    var_cond = variance_term(law, gamma)
    sq2pi = math.sqrt(2.0 * math.pi)

    terms = {
        "variance_term": sigma2 / (2.0 * lam) * math.sqrt(var_cond),
        "remainder_term": sigma2
        * (rt * (sq2pi + 4.0) / 4.0 + 1.5 * A)
        * decomp.remainder_l2
        / lam,
        "cube_term": sigma2 * A**3 / lam * (rt * sq2pi / 16.0 + rt / 4.0),
        "psi_term": sigma2 * 1.5 * A * rt,
        "tail_term": 0.0,
    }
    total = math.fsum(terms.values())

    density = normalize_density(1.0 / (2.0 * ew2), 0.0, 0.0)
    exact_dk = kolmogorov_distance(law, gamma, density.cdf_at_sorted)
    return BoundReport(
        kind="normal",
        case_id=case.case_id,
        n=n,
        gamma=gamma,
        lam=lam,
        a_halfwidth=A,
        terms=terms,
        total=total,
        exact_dk=exact_dk,
        drift_scale=ew2 / sigma2,
        constants={"sigma2": sigma2},
        grid_spec=None,
    )
