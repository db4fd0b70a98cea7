"""The tilted truncated geometric law and the statistic M built from it.

k - 1 balls fall independently into bins 1..k with
Pr[T = i] = p (1-p)^(i-1) / (1 - (1-p)^k), and M = C(k,2) - sum_j T_j.

Functions taking ``p`` are exact when ``p`` is a :class:`fractions.Fraction`
(or int) and return a Fraction; a float ``p`` selects float mode, evaluated
with extra working precision where cancellation would otherwise bite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import mpmath

from .census import max_complexity
from .errors import ConvergenceError, DomainError, NoSolutionError

_DPS = 50


def is_exact(p) -> bool:
    return isinstance(p, Rational)


def _check_p(p):
    if not 0 < p <= 1:
        raise DomainError(f"tilt p must lie in (0, 1], got {p}")


def truncated_geometric_pmf(k: int, p, i: int):
    _check_p(p)
    if not 1 <= i <= k:
        raise DomainError(f"bin index {i} outside [1, {k}]")
    if is_exact(p):
        p = Fraction(p)
        q = 1 - p
        return p * q ** (i - 1) / (1 - q ** k)
    q = 1.0 - p
    return p * q ** (i - 1) / -math.expm1(k * math.log1p(-p)) if p < 1 else float(i == 1)


def pmf_vector(k: int, p):
    """All k bin probabilities (list of Fractions, or numpy array for float p)."""
    _check_p(p)
    if is_exact(p):
        p = Fraction(p)
        q = 1 - p
        norm = 1 - q ** k
        out, w = [], p
        for _ in range(k):
            out.append(w / norm)
            w *= q
        return out
    import numpy as np

    if p == 1.0:
        v = np.zeros(k)
        v[0] = 1.0
        return v
    logw = np.arange(k) * math.log1p(-p)
    w = np.exp(logw)
    return w / w.sum()


def _t_moments_exact(k, p):
    """E[T], E[T^2] for the truncated law, by conditioning a geometric on T <= k."""
    p = Fraction(p)
    q = 1 - p
    qk = q ** k
    z = 1 - qk
    e1 = (1 / p - qk * (k + 1 / p)) / z
    g2 = (1 + q) / p ** 2
    e2 = (g2 - qk * (k * k + 2 * k / p + g2)) / z
    return e1, e2


def _t_moments_mp(k, p):
    with mpmath.workdps(_DPS):
        p = mpmath.mpf(p)
        q = 1 - p
        qk = mpmath.power(q, k)
        z = -mpmath.expm1(k * mpmath.log1p(-p)) if p < 1 else mpmath.mpf(1)
        e1 = 1 / p - k * qk / z
        g2 = (1 + q) / p ** 2
        e2 = (g2 - qk * (k * k + 2 * k / p + g2)) / z
        return e1, e2


def mean_T(k: int, p):
    _check_p(p)
    if is_exact(p):
        return _t_moments_exact(k, p)[0]
    return float(_t_moments_mp(k, p)[0])


def mean_M(k: int, p):
    """Mean of M, i.e. C(k,2) - (k-1) E[T_1]."""
    _check_p(p)
    if is_exact(p):
        return math.comb(k, 2) - (k - 1) * _t_moments_exact(k, p)[0]
    return float(_mean_M_mp(k, p))


def _mean_M_mp(k, p):
    with mpmath.workdps(_DPS):
        e1, _ = _t_moments_mp(k, p)
        return mpmath.mpf(k * (k - 1)) / 2 - (k - 1) * e1


def mean_M_direct(k: int, p):
    """Mean of M by summing i * pmf(i) over the bins."""
    probs = pmf_vector(k, p)
    et = sum((i + 1) * w for i, w in enumerate(probs))
    return math.comb(k, 2) - (k - 1) * et


def mean_M_bracket(k: int, p):
    """Mean of M from the explicit bracket (k-1)[k/2 - E[T_1]], E[T_1] in closed form."""
    _check_p(p)
    p = Fraction(p)
    q = 1 - p
    et = (1 - (k + 1) * p * q ** k - q ** (k + 1)) / (p * (1 - q ** k))
    return (k - 1) * (Fraction(k, 2) - et)


def mean_M_large_p(k: int, p):
    """C(k,2) - (k-1)/p + k(k-1)(1-p)^k / (1-(1-p)^k), the derived large-p form."""
    _check_p(p)
    p = Fraction(p)
    qk = (1 - p) ** k
    return math.comb(k, 2) - (k - 1) / p + k * (k - 1) * qk / (1 - qk)


def mean_M_large_p_flipped(k: int, p):
    """Same expression with the sign of the last term flipped; kept for comparison only."""
    _check_p(p)
    p = Fraction(p)
    qk = (1 - p) ** k
    return math.comb(k, 2) - (k - 1) / p - k * (k - 1) * qk / (1 - qk)


def var_M(k: int, p):
    """Variance of M, (k-1) Var(T_1)."""
    _check_p(p)
    if is_exact(p):
        e1, e2 = _t_moments_exact(k, p)
        return (k - 1) * (e2 - e1 * e1)
    with mpmath.workdps(_DPS):
        e1, e2 = _t_moments_mp(k, p)
        return float((k - 1) * (e2 - e1 * e1))


def var_M_direct(k: int, p):
    probs = pmf_vector(k, p)
    e1 = sum((i + 1) * w for i, w in enumerate(probs))
    e2 = sum((i + 1) ** 2 * w for i, w in enumerate(probs))
    return (k - 1) * (e2 - e1 * e1)


def tilt_lambdas(k: int, p):
    """Expected balls in the leftmost and the rightmost bin."""
    _check_p(p)
    if is_exact(p):
        p = Fraction(p)
        q = 1 - p
        z = 1 - q ** k
        return (k - 1) * p / z, (k - 1) * p * q ** (k - 1) / z
    with mpmath.workdps(_DPS):
        pm = mpmath.mpf(p)
        z = -mpmath.expm1(k * mpmath.log1p(-pm)) if p < 1 else mpmath.mpf(1)
        lam = (k - 1) * pm / z
        lam_r = lam * mpmath.power(1 - pm, k - 1)
        return float(lam), float(lam_r)


def _scaled_mean(k, p_mp):
    """p * mu(p) in working precision."""
    e1, _ = _t_moments_mp(k, p_mp)
    return p_mp * (mpmath.mpf(k * (k - 1)) / 2 - (k - 1) * e1)


def tilt_residual(k: int, p, target) -> float:
    """|p mu(p) - target| evaluated in high precision."""
    with mpmath.workdps(_DPS):
        return float(abs(_scaled_mean(k, mpmath.mpf(p)) - mpmath.mpf(target)))


def solve_tilt(k: int, l, tol_abs=None, max_iter: int = 400) -> float:
    """Root p in (0, 1] of p * mean_M(k, p) = l.

    Bisection on log p, exploiting that p -> p mu(p) is increasing.  ``l``
    may be any positive real not above the complexity of K_k.
    """
    if k < 2:
        raise DomainError(f"k must be at least 2, got {k}")
    if l <= 0:
        raise DomainError(f"target complexity must be positive, got {l}")
    top = max_complexity(k)
    if l > top:
        raise NoSolutionError(f"l = {l} exceeds max complexity {top} of K_{k}")
    if l == top:
        return 1.0
    if tol_abs is None:
        tol_abs = 1e-12 * l
    with mpmath.workdps(_DPS):
        target = mpmath.mpf(l)
        lo, hi = math.log(1e-300), 0.0
        for _ in range(max_iter):
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                break
            if _scaled_mean(k, mpmath.exp(mid)) < target:
                lo = mid
            else:
                hi = mid
        best = min((math.exp(lo), math.exp(hi), min(1.0, math.nextafter(math.exp(hi), 2))),
                   key=lambda x: abs(_scaled_mean(k, mpmath.mpf(x)) - target))
        resid = float(abs(_scaled_mean(k, mpmath.mpf(best)) - target))
    if resid > tol_abs:
        raise ConvergenceError(f"tilt residual {resid:.3e} above {tol_abs:.3e} for k={k}, l={l}")
    return best


def _kappa_parts(c):
    e = mpmath.exp(-c)
    kappa = c / (1 - e)
    second = kappa * (e * (-1 / c - 2 / c ** 2 - 2 / c ** 3) + 2 / c ** 3)
    first = kappa * (e * (-1 / c - 1 / c ** 2) + 1 / c ** 2)
    return first, second


def f1(c) -> float:
    """Limit of p*mu/k at p = c/k."""
    if c <= 0:
        raise DomainError(f"c must be positive, got {c}")
    with mpmath.workdps(_DPS):
        c = mpmath.mpf(c)
        e = mpmath.exp(-c)
        return float(c * (mpmath.mpf(1) / 2 - (1 - (c + 1) * e) / (c * (1 - e))))


def f2(c) -> float:
    """Limit of sigma^2/k^3 at p = c/k (variance of a truncated exponential on [0, 1])."""
    if c <= 0:
        raise DomainError(f"c must be positive, got {c}")
    with mpmath.workdps(_DPS):
        first, second = _kappa_parts(mpmath.mpf(c))
        return float(second - first ** 2)


def solve_c(beta, tol: float = 1e-12, max_iter: int = 500) -> float:
    """c > 0 with exp(-c) = (2(beta+1) - c) / (2(beta+1) + c)."""
    if beta <= 0:
        raise DomainError(f"beta must be positive, got {beta}")
    with mpmath.workdps(_DPS):
        s = 2 * (mpmath.mpf(beta) + 1)

        def g(c):
            return mpmath.exp(-c) - (s - c) / (s + c)

        # g < 0 just right of 0 (slope -c^3/(6 s^2)...) and g > 0 at c = s.
        lo, hi = mpmath.mpf(0), s
        for _ in range(max_iter):
            mid = (lo + hi) / 2
            if g(mid) < 0:
                lo = mid
            else:
                hi = mid
            if hi - lo < mpmath.mpf(10) ** (-40):
                break
        c = (lo + hi) / 2
        resid = abs(g(c))
    if resid > tol:
        raise ConvergenceError(f"solve_c residual {float(resid):.3e} for beta={beta}")
    return float(c)


@dataclass(frozen=True)
class RegimeTag:
    name: str            # small | large | very_large | out_of_range
    c_or_beta: float | None = None


SMALL_EXPONENT = 0.9
LARGE_EXPONENT = 1.1


def classify_regime(k: int, l, small_exp: float = SMALL_EXPONENT,
                    large_exp: float = LARGE_EXPONENT) -> RegimeTag:
    """Assign (k, l) to one of the three asymptotic regimes by power thresholds."""
    if k < 2 or l < 1:
        raise DomainError(f"need k >= 2 and l >= 1, got ({k}, {l})")
    if l > k * math.log(k):
        return RegimeTag("out_of_range")
    if l <= k ** small_exp:
        return RegimeTag("small")
    if l < k ** large_exp:
        return RegimeTag("large", solve_c(l / k))
    return RegimeTag("very_large")


@dataclass(frozen=True)
class TiltedModel:
    k: int
    p: object
    lam: float
    lam_r: float
    epsilon: float
    mu: object
    sigma2: object
    regime: str

    @property
    def c(self) -> float:
        return float(self.p) * self.k


def tilted_model(k: int, p) -> TiltedModel:
    """Bundle the derived quantities of the tilt p on k bins."""
    _check_p(p)
    lam, lam_r = tilt_lambdas(k, p)
    mu = mean_M(k, p)
    sigma2 = var_M(k, p)
    scaled = float(p) * float(mu)
    if k >= 2 and scaled >= 1:
        regime = classify_regime(k, scaled).name
    else:
        regime = "small"
    return TiltedModel(k=k, p=p, lam=float(lam), lam_r=float(lam_r),
                       epsilon=float(p) * k / 2, mu=mu, sigma2=sigma2, regime=regime)
