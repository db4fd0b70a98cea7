"""Log-space asymptotic formulas for C(k, l) and comparison with exact counts.

Three regimes, each evaluated in natural logs so nothing overflows:

* small l:  C ~ k^(k-2) k^(3l/2) (e/(12 l))^(l/2) 3 pi^(-1/2) l^(1/2)
* l = beta k:  reassembled from the counting identity at p = c/k, f1(c) = beta
* very large l:  C ~ binom(C(k,2), k+l-1)

For the linear regime two numbers are produced.  The authoritative one
rebuilds log C from the three factors of the identity (exact A1 at p = c/k,
the limits 1 - (c+1)e^(-c) and (2 pi sigma_Y^2)^(-1/2) for the other two)
and the exact p-powers.  The closed form A * B^k * k^((1+beta)k) * k^(-3/2)
is reported alongside for comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .census import count_connected
from .errors import DomainError
from .tilt import RegimeTag, classify_regime, f2, mean_M, solve_c, var_M

SMALL_WARN_EXPONENT = 0.45
EXACT_BINOMIAL_LIMIT = 200_000
EXACT_BINOMIAL_SHORT = 1_000     # math.comb is cheap when r or n - r is small


@dataclass(frozen=True)
class AsymptoticEstimate:
    k: int
    l: int
    regime: RegimeTag
    log_value: float
    components: dict
    warning: str | None = None
    alternatives: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ComparisonRow:
    k: int
    l: int
    log_exact: float
    log_asymptotic: float
    rel_log_error: float
    regime: str


def sigma_Y(k: int, p) -> float:
    """sqrt(p mu + p^2 sigma^2) for the tilt p."""
    p = float(p)
    if not 0 < p <= 1:
        raise DomainError(f"tilt p must lie in (0, 1], got {p}")
    val = p * mean_M(k, p) + p * p * var_M(k, p)
    return math.sqrt(max(val, 0.0))


def _estimate(k, l, regime, components, **extra):
    return AsymptoticEstimate(k=k, l=l, regime=regime, log_value=math.fsum(components.values()),
                              components=components, **extra)


def log_cayley(k: int) -> float:
    return (k - 2) * math.log(k) if k >= 2 else 0.0


def log_asymptotic_small(k: int, l: int) -> AsymptoticEstimate:
    if l < 1:
        raise DomainError(f"small-l formula needs l >= 1, got {l}")
    lk = math.log(k)
    comps = {
        "trees": (k - 2) * lk,
        "k_power": 1.5 * l * lk,
        "e_over_12l": 0.5 * l * (1 - math.log(12 * l)),
        "constant": math.log(3) - 0.5 * math.log(math.pi),
        "sqrt_l": 0.5 * math.log(l),
    }
    warning = None
    if l > k ** SMALL_WARN_EXPONENT:
        warning = f"l = {l} exceeds k^{SMALL_WARN_EXPONENT}; small-l formula outside its range"
    return _estimate(k, l, RegimeTag("small"), comps, warning=warning)


def large_closed_form(k: int, l: int) -> float:
    """log of A * B^k * k^((1+beta)k) * k^(-3/2) with the displayed constants."""
    beta = l / k
    c = solve_c(beta)
    s = 2 * (beta + 1)
    spread = 1 + c * c * f2(c) / beta
    log_a = (math.log(abs(c * (c - 2 * beta))) - 0.5 * math.log(8 * math.pi * beta * spread)
             - c * (beta / 2 + 1))
    log_b = math.log(2) - beta * math.log(c) - 0.5 * math.log(s * s - c * c)
    lk = math.log(k)
    return log_a + k * log_b + (1 + beta) * k * lk - 1.5 * lk


def log_asymptotic_large(k: int, l: int) -> AsymptoticEstimate:
    if l < 1:
        raise DomainError(f"linear-l formula needs l >= 1, got {l}")
    beta = l / k
    c = solve_c(beta)
    p = c / k
    log_q = math.log1p(-p)
    edges = k + l - 1
    spread = 1 + c * c * f2(c) / beta
    comps = {
        "log_A1": (k - 1) * math.log(-math.expm1(k * log_q)),
        "log_A2": math.log1p(-(c + 1) * math.exp(-c)),
        "log_A3": -0.5 * math.log(2 * math.pi * k * beta * spread),
        "p_power": -edges * math.log(p),
        "q_power": -(math.comb(k, 2) - edges) * log_q,
    }
    est = _estimate(k, l, RegimeTag("large", c), comps,
                    alternatives={"closed_form": large_closed_form(k, l)})
    return est


def log_binomial(n: int, r: int) -> float:
    if r < 0 or r > n:
        return -math.inf
    if n <= EXACT_BINOMIAL_LIMIT or min(r, n - r) <= EXACT_BINOMIAL_SHORT:
        return math.log(math.comb(n, r))
    return math.lgamma(n + 1) - math.lgamma(r + 1) - math.lgamma(n - r + 1)


def log_asymptotic_verylarge(k: int, l: int) -> AsymptoticEstimate:
    if l < 1:
        raise DomainError(f"very-large formula needs l >= 1, got {l}")
    comps = {"log_binomial": log_binomial(math.comb(k, 2), k + l - 1)}
    return _estimate(k, l, RegimeTag("very_large"), comps)


def log_asymptotic(k: int, l: int) -> AsymptoticEstimate:
    """Pick the regime formula for (k, l); l = 0 returns Cayley's count exactly."""
    if k < 2:
        raise DomainError(f"k must be at least 2, got {k}")
    if l == 0:
        return _estimate(k, 0, RegimeTag("small"), {"trees": log_cayley(k)})
    tag = classify_regime(k, l)
    if tag.name == "small":
        return log_asymptotic_small(k, l)
    if tag.name == "large":
        return log_asymptotic_large(k, l)
    est = log_asymptotic_verylarge(k, l)
    if tag.name == "out_of_range":
        est = AsymptoticEstimate(k, l, tag, est.log_value, est.components,
                                 warning="l > k ln k: every regime formula is extrapolated")
    return est


def parse_l_rule(rule: str) -> Callable[[int], int]:
    """``const:N``, ``pow:a`` (floor k^a), ``lin:b`` (floor b k) or ``nlogn:c`` (floor c k ln k)."""
    kind, _, arg = rule.partition(":")
    if not arg:
        raise DomainError(f"l-rule needs the form kind:value, got {rule!r}")
    try:
        value = float(arg)
    except ValueError:
        raise DomainError(f"bad l-rule parameter {arg!r}") from None
    rules = {
        "const": lambda k: int(value),
        "pow": lambda k: math.floor(k ** value),
        "lin": lambda k: math.floor(value * k),
        "nlogn": lambda k: math.floor(value * k * math.log(k)),
    }
    if kind not in rules:
        raise DomainError(f"unknown l-rule {kind!r}; expected one of {sorted(rules)}")
    return rules[kind]


def compare_row(k: int, l: int) -> ComparisonRow:
    exact = count_connected(k, l)
    log_exact = math.log(exact)
    if l == 0:
        return ComparisonRow(k, l, log_exact, log_exact, 0.0, "tree")
    est = log_asymptotic(k, l)
    rel = abs(est.log_value - log_exact) / log_exact
    return ComparisonRow(k, l, log_exact, est.log_value, rel, est.regime.name)


def compare_table(k_values: Iterable[int], l_rule) -> list[ComparisonRow]:
    if isinstance(l_rule, str):
        l_rule = parse_l_rule(l_rule)
    return [compare_row(k, l_rule(k)) for k in k_values]
