"""Exact evaluation of the tilted balls-into-bins process.

Bin counts Z_1..Z_k of k-1 balls drive the queue walk Y_0 = 1,
Y_i = Y_{i-1} + Z_i - 1.  TREE is the event Y_t > 0 for 1 <= t <= k-1 and
M = C(k,2) - sum_j T_j = sum_{i<k} (Y_i - 1).

The dynamic programs below place balls bin by bin.  With integer weights
w_t = a (b-a)^(t-1) b^(k-t) for p = a/b (so pmf_t = w_t / W), the multinomial
weight of a placement factors as prod_t binom(s_t, z_t) w_t^z_t / W^(k-1),
where s_t = z_1 + ... + z_t.  Exact mode therefore runs on plain integers and
divides once at the end.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import gammaln, logsumexp

from .census import count_connected, max_complexity
from .config import current_caps
from .errors import CapExceeded, ConvergenceError, DomainError
from .tilt import _check_p, is_exact, pmf_vector


@dataclass(frozen=True)
class Placement:
    k: int
    T: tuple
    Z: tuple

    @classmethod
    def from_T(cls, k, T):
        Z = [0] * k
        for t in T:
            if not 1 <= t <= k:
                raise DomainError(f"ball location {t} outside [1, {k}]")
            Z[t - 1] += 1
        if len(T) != k - 1:
            raise DomainError(f"need {k - 1} balls, got {len(T)}")
        return cls(k, tuple(T), tuple(Z))


@dataclass(frozen=True)
class WalkTrace:
    Y: tuple
    tree: bool
    m_stat: int


def walk_from_counts(Z) -> WalkTrace:
    """Queue walk of the bin counts Z, with the TREE flag and M."""
    Z = [int(z) for z in Z]
    k = len(Z)
    if k < 1 or any(z < 0 for z in Z) or sum(Z) != k - 1:
        raise DomainError(f"bin counts must be {k} nonnegative integers summing to {k - 1}")
    Y = [1]
    for z in Z:
        Y.append(Y[-1] + z - 1)
    assert Y[-1] == 0
    tree = all(y > 0 for y in Y[1:k])
    by_queue = sum(y - 1 for y in Y[1:k])
    by_balls = math.comb(k, 2) - sum((i + 1) * z for i, z in enumerate(Z))
    if by_queue != by_balls:  # pragma: no cover - identity of the walk
        raise AssertionError("queue excess disagrees with ball positions")
    return WalkTrace(tuple(Y), tree, by_queue)


def _integer_weights(k, p):
    p = Fraction(p)
    a, b = p.numerator, p.denominator
    w = [a * (b - a) ** (t - 1) * b ** (k - t) for t in range(1, k + 1)]
    return w, b ** k - (b - a) ** k


def _tree_dp_exact(k, p):
    w, W = _integer_weights(k, p)
    row = {0: 1}
    for t in range(1, k):
        wt = w[t - 1]
        powers = [1]
        for _ in range(k):
            powers.append(powers[-1] * wt)
        new = {}
        for s in range(t, k):
            total = 0
            for prev, val in row.items():
                if prev <= s:
                    z = s - prev
                    total += val * math.comb(s, z) * powers[z]
            if total:
                new[s] = total
        row = new
    # bin k takes the remaining balls
    wk = w[k - 1]
    acc = sum(val * math.comb(k - 1, k - 1 - s) * wk ** (k - 1 - s) for s, val in row.items())
    return Fraction(acc, W ** (k - 1))


def _log_binom_conditionals(k, p):
    """log r_t and log(1 - r_t), r_t = Pr[ball in bin t | not in bins < t]."""
    t = np.arange(1, k + 1)
    log_tail = np.log(-np.expm1((k - t + 1) * math.log1p(-p)))
    log_r = np.minimum(math.log(p) - log_tail, 0.0)
    with np.errstate(divide="ignore"):
        log_1mr = np.log(-np.expm1(log_r))
    return log_r, log_1mr


def _tree_dp_float(k, p):
    if p == 1.0:
        return 1.0
    lf = gammaln(np.arange(k + 1) + 1.0)
    log_r, log_1mr = _log_binom_conditionals(k, p)
    n = k - 1
    # log Pr[S_{t-1} = s, constraint so far], entries for s = lo..n
    lo = 0
    logf = np.full(n + 1, -np.inf)
    logf[0] = 0.0
    for t in range(1, k):
        s_old = np.arange(lo, n + 1)
        new_lo = t
        s_new = np.arange(new_lo, n + 1)
        z = s_new[None, :] - s_old[:, None]
        valid = z >= 0
        zc = np.where(valid, z, 0)
        rem_old = n - s_old
        # binomial(rem_old, z) r^z (1-r)^(rem_old - z)
        lt = (lf[rem_old][:, None] - lf[zc] - lf[(rem_old[:, None] - zc)]
              + zc * log_r[t - 1] + (rem_old[:, None] - zc) * log_1mr[t - 1])
        lt = np.where(valid, lt + logf[:, None], -np.inf)
        logf = logsumexp(lt, axis=0)
        lo = new_lo
    # only s = n survives to bin k with zero balls left over
    return float(np.exp(logf[-1]))


def mstar_mean(k: int, p: float) -> float:
    """E[M | TREE] in float mode, by the Pr[TREE] DP carrying a first moment.

    Costs O(k^3) like :func:`prob_tree_exact` in float mode; used to measure
    how far conditioning on TREE moves M away from its unconditioned mean.
    """
    if k < 2:
        raise DomainError(f"k must be at least 2, got {k}")
    p = float(p)
    _check_p(p)
    if p == 1.0:
        return float(math.comb(k, 2) - (k - 1))
    lf = gammaln(np.arange(k + 1) + 1.0)
    log_r, log_1mr = _log_binom_conditionals(k, p)
    n = k - 1
    logf = np.full(n + 1, -np.inf)
    logf[0] = 0.0
    logg = np.full(n + 1, -np.inf)   # log E[m; path, S = s]
    lo = 0
    for t in range(1, k):
        s_old = np.arange(lo, n + 1)
        s_new = np.arange(t, n + 1)
        z = s_new[None, :] - s_old[:, None]
        valid = z >= 0
        zc = np.where(valid, z, 0)
        rem = (n - s_old)[:, None]
        lk = (lf[n - s_old][:, None] - lf[zc] - lf[rem - zc]
              + zc * log_r[t - 1] + (rem - zc) * log_1mr[t - 1])
        lk = np.where(valid, lk, -np.inf)
        logf_new = logsumexp(lk + logf[:, None], axis=0)
        logg_new = logsumexp(lk + logg[:, None], axis=0)
        with np.errstate(divide="ignore"):
            logg_new = np.logaddexp(logg_new, logf_new + np.log((s_new - t).astype(float)))
        logf, logg, lo = logf_new, logg_new, t
    return math.exp(logg[-1] - logf[-1])


def prob_tree_exact(k: int, p, mode: str | None = None):
    """Pr[TREE] for k-1 tilted balls in k bins.

    ``mode`` is "exact" (Fraction result) or "float"; by default it follows
    the type of ``p``.
    """
    if k < 2:
        raise DomainError(f"k must be at least 2, got {k}")
    _check_p(p)
    caps = current_caps()
    mode = mode or ("exact" if is_exact(p) else "float")
    if mode == "exact":
        if k > caps.exact_tree_k:
            raise CapExceeded(f"exact Pr[TREE] capped at k={caps.exact_tree_k}")
        return _tree_dp_exact(k, Fraction(p))
    if k > caps.float_tree_k:
        raise CapExceeded(f"float Pr[TREE] capped at k={caps.float_tree_k}")
    return _tree_dp_float(k, float(p))


@dataclass(frozen=True)
class MStarDistribution:
    k: int
    p: object
    prob_tree: object
    mass: dict = field(repr=False)
    mode: str = "exact"

    def support(self):
        return min(self.mass), max(self.mass)

    def mean(self):
        return sum(m * w for m, w in self.mass.items())

    def cdf(self, x):
        return sum(w for m, w in self.mass.items() if m <= x)


def _joint_dp(k, p, exact):
    """Per final state, polynomial in the running queue excess m (list of coeffs)."""
    if exact:
        w, W = _integer_weights(k, p)
        comb = math.comb
    else:
        w = [float(x) for x in pmf_vector(k, float(p))]
        W = 1.0

        def comb(n, r):
            return float(math.comb(n, r))

    row = {0: [1 if exact else 1.0]}
    zero = 0 if exact else 0.0
    for t in range(1, k):
        wt = w[t - 1]
        powers = [1 if exact else 1.0]
        for _ in range(k):
            powers.append(powers[-1] * wt)
        new = {}
        for s in range(t, k):
            acc = None
            for prev, poly in row.items():
                if prev > s:
                    continue
                z = s - prev
                factor = comb(s, z) * powers[z]
                if not factor:
                    continue
                if acc is None:
                    acc = [c * factor for c in poly]
                else:
                    if len(poly) > len(acc):
                        acc.extend([zero] * (len(poly) - len(acc)))
                    for i, c in enumerate(poly):
                        acc[i] += c * factor
            if acc is None:
                continue
            # queue excess after bin t is Y_t - 1 = s - t
            new[s] = [zero] * (s - t) + acc
        row = new
    wk = w[k - 1]
    final = {}
    for s, poly in row.items():
        factor = comb(k - 1, k - 1 - s) * wk ** (k - 1 - s)
        for m, c in enumerate(poly):
            if c:
                final[m] = final.get(m, zero) + c * factor
    return final, W ** (k - 1)


def mstar_distribution(k: int, p, mode: str | None = None) -> MStarDistribution:
    """Law of M conditioned on TREE, with Pr[TREE]."""
    if k < 2:
        raise DomainError(f"k must be at least 2, got {k}")
    _check_p(p)
    mode = mode or ("exact" if is_exact(p) else "float")
    caps = current_caps()
    if k > caps.exact_joint_k:
        raise CapExceeded(f"joint (s, m) DP capped at k={caps.exact_joint_k}")
    exact = mode == "exact"
    final, denom = _joint_dp(k, Fraction(p) if exact else float(p), exact)
    total = sum(final.values())
    if exact:
        mass = {m: Fraction(c, total) for m, c in sorted(final.items())}
        prob = Fraction(total, denom)
    else:
        mass = {m: c / total for m, c in sorted(final.items())}
        prob = total / denom
    return MStarDistribution(k=k, p=p, prob_tree=prob, mass=mass, mode=mode)


def a1(k: int, p):
    """Probability every non-root vertex sees at least one head in k flips."""
    _check_p(p)
    if is_exact(p):
        return (1 - (1 - Fraction(p)) ** k) ** (k - 1)
    return (-math.expm1(k * math.log1p(-p)) if p < 1 else 1.0) ** (k - 1)


def a3_exact(dist: MStarDistribution, l: int):
    """Pr[BIN[M*, p] = l] as a binomial mixture over the law of M*."""
    if l < 0:
        raise DomainError(f"l must be nonnegative, got {l}")
    p = Fraction(dist.p) if dist.mode == "exact" else float(dist.p)
    q = 1 - p
    total = 0
    for m, w in dist.mass.items():
        if m >= l:
            total += w * math.comb(m, l) * p ** l * q ** (m - l)
    return total


@dataclass(frozen=True)
class IdentityReport:
    k: int
    l: int
    p: Fraction
    a1: Fraction
    a2: Fraction
    a3: Fraction
    lhs: Fraction
    rhs: Fraction
    equal: bool


def verify_identity(k: int, l: int, p, dist: MStarDistribution | None = None) -> IdentityReport:
    """Check A1 * A2 * A3 == C(k,l) p^(k+l-1) (1-p)^(C(k,2)-(k+l-1)) exactly."""
    if k < 2:
        raise DomainError(f"k must be at least 2, got {k}")
    if not 0 <= l <= max_complexity(k):
        raise DomainError(f"l = {l} outside [0, {max_complexity(k)}]")
    p = Fraction(p)
    _check_p(p)
    if dist is None:
        dist = mstar_distribution(k, p, mode="exact")
    f1_ = a1(k, p)
    f2_ = dist.prob_tree
    f3_ = a3_exact(dist, l)
    lhs = f1_ * f2_ * f3_
    edges = k + l - 1
    rhs = count_connected(k, l) * p ** edges * (1 - p) ** (math.comb(k, 2) - edges)
    return IdentityReport(k, l, p, f1_, f2_, f3_, lhs, rhs, lhs == rhs)


def brute_force_joint(k: int, p):
    """Pr[TREE] and law of M* by enumerating all k^(k-1) ball placements."""
    caps = current_caps()
    if k < 2:
        raise DomainError(f"k must be at least 2, got {k}")
    if k > caps.brute_force_k:
        raise CapExceeded(f"brute force limited to k <= {caps.brute_force_k}")
    p = Fraction(p)
    _check_p(p)
    w, W = _integer_weights(k, p)
    tree_weight = 0
    by_m: dict[int, int] = {}
    for T in itertools.product(range(1, k + 1), repeat=k - 1):
        Z = [0] * k
        weight = 1
        for t in T:
            Z[t - 1] += 1
            weight *= w[t - 1]
        trace = walk_from_counts(Z)
        if trace.tree and weight:
            tree_weight += weight
            by_m[trace.m_stat] = by_m.get(trace.m_stat, 0) + weight
    prob = Fraction(tree_weight, W ** (k - 1))
    mass = {m: Fraction(c, tree_weight) for m, c in sorted(by_m.items())}
    return prob, MStarDistribution(k=k, p=p, prob_tree=prob, mass=mass, mode="exact")


def survival_probability(lam: float, tol: float = 1e-12, max_iter: int = 400) -> float:
    """Survival probability of a Galton-Watson tree with Poisson(lam) offspring.

    Root in (0, 1) of exp(-lam y) = 1 - y, or 0 when lam <= 1.
    """
    if lam <= 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    if lam <= 1:
        return 0.0

    # 1 - y - exp(-lam y): positive between 0 and the root, negative after
    def g(y):
        return -math.expm1(-lam * y) - y

    lo, hi = 1e-15, 1 - 1e-15
    if g(lo) <= 0:
        # root closer to 0 than lo can resolve; only when lam - 1 ~ 1e-15
        return 0.0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-17:
            break
    y = 0.5 * (lo + hi)
    if abs(g(y)) > tol:
        raise ConvergenceError(f"survival residual {abs(g(y)):.3e} for lambda={lam}")
    return y


def esc_right_probability(eps: float) -> float:
    """Escape probability of the right walk with Poisson(1 - eps) steps: exactly eps."""
    if not 0 < eps < 1:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    return eps
