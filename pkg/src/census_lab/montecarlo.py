"""Seeded Monte Carlo estimators for the walk and excursion probabilities.

Reproducibility contract: a run is determined by (seed, n, workers).  The
seed feeds a :class:`numpy.random.SeedSequence` that is spawned into one
counter-based Philox stream per worker; each worker owns a fixed share of the
samples, and the per-worker tallies are summed.  Changing ``workers`` changes
the streams and hence the exact numbers, not their law.

Placements are generated either directly from the truncated geometric law by
inversion (:func:`sample_placement`, :func:`sample_placements`) or bin by bin
with conditional binomials, which stops early once TREE has failed.  Both
target the same multinomial law; the estimators use the second.
"""

from __future__ import annotations

import math
import secrets
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
from scipy.stats import norm

from .errors import AcceptanceTooLow, DomainError
from .tilt import is_exact, mean_M, var_M
from .walk import Placement

PILOT_DRAWS = 10_000
MIN_ACCEPTANCE = 1e-3
_CHUNK_ELEMENTS = 2_000_000


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    n: int
    accepted: int
    seed: int
    workers: int
    params: dict = field(default_factory=dict)

    def within(self, target: float, n_stderr: float = 4.0) -> bool:
        return abs(self.mean - target) <= n_stderr * self.stderr

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class CltReport:
    k: int
    p: float
    u_grid: list
    empirical: list
    gaussian: list
    max_abs_dev: float
    accepted: int
    draws: int
    mu: float
    sigma: float
    seed: int
    workers: int

    def to_dict(self):
        return asdict(self)


def fresh_seed() -> int:
    return secrets.randbits(64)


def _seed_sequences(seed: int, workers: int):
    if workers < 1:
        raise DomainError(f"workers must be positive, got {workers}")
    return np.random.SeedSequence(seed).spawn(workers)


def make_rng(seed_seq) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed_seq))


def _shares(n: int, workers: int):
    base, extra = divmod(n, workers)
    return [base + (1 if i < extra else 0) for i in range(workers)]


def _fan_out(fn, jobs, workers):
    if workers == 1:
        return [fn(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*jobs)))


def _model_params(k, p):
    return {"k": k, "p": str(p) if is_exact(p) else float(p),
            "c": float(p) * k, "epsilon": float(p) * k / 2}


def _indicator_estimate(hits, total, seed, workers, n=None, params=None):
    mean = hits / total if total else float("nan")
    stderr = math.sqrt(mean * (1 - mean) / total) if total else float("nan")
    return McEstimate(mean=mean, stderr=stderr, n=total if n is None else n,
                      accepted=total, seed=seed, workers=workers, params=params or {})


# -- placements ---------------------------------------------------------------

def sample_placements(k: int, p: float, size: int, rng) -> np.ndarray:
    """Ball locations T (shape size x (k-1)) by inverting the truncated geometric CDF."""
    p = float(p)
    if not 0 < p <= 1:
        raise DomainError(f"tilt p must lie in (0, 1], got {p}")
    if p == 1.0:
        return np.ones((size, k - 1), dtype=np.int64)
    u = rng.random((size, k - 1))
    log_q = math.log1p(-p)
    mass = -math.expm1(k * log_q)
    T = 1 + np.floor(np.log1p(-u * mass) / log_q).astype(np.int64)
    return np.clip(T, 1, k)


def sample_placement(k: int, p: float, rng) -> Placement:
    T = sample_placements(k, p, 1, rng)[0]
    return Placement.from_T(k, tuple(int(t) for t in T))


def placements_tree_and_m(T: np.ndarray, k: int):
    """TREE indicator and M for each row of ball locations."""
    size = T.shape[0]
    flat = (T - 1) + k * np.arange(size)[:, None]
    Z = np.bincount(flat.ravel(), minlength=size * k).reshape(size, k)
    prefix = np.cumsum(Z[:, : k - 1], axis=1)
    tree = np.all(prefix >= np.arange(1, k), axis=1)
    m = k * (k - 1) // 2 - T.sum(axis=1)
    return tree, m


def _conditionals(k, p):
    t = np.arange(1, k + 1)
    tail = -np.expm1((k - t + 1) * math.log1p(-p))
    return np.minimum(p / tail, 1.0)


def sequential_tree_batch(k: int, p: float, size: int, rng):
    """Bin-by-bin sampler: returns (tree indicator, M) with M valid on TREE rows.

    Rows leave the loop as soon as their prefix count drops below the bin
    index, so failed placements cost only as many bins as they survived.
    """
    p = float(p)
    tree = np.zeros(size, dtype=bool)
    m_out = np.zeros(size, dtype=np.int64)
    if p == 1.0:
        tree[:] = True
        m_out[:] = k * (k - 1) // 2 - (k - 1)
        return tree, m_out
    r = _conditionals(k, p)
    idx = np.arange(size)
    s = np.zeros(size, dtype=np.int64)
    m = np.zeros(size, dtype=np.int64)
    for t in range(1, k):
        s = s + rng.binomial(k - 1 - s, r[t - 1])
        ok = s >= t
        if not ok.all():
            idx, s, m = idx[ok], s[ok], m[ok]
        if idx.size == 0:
            break
        m += s - t
    tree[idx] = True
    m_out[idx] = m
    return tree, m_out


def _batch_rows(k):
    return max(1, _CHUNK_ELEMENTS // max(k, 1))


# -- Pr[TREE] -----------------------------------------------------------------

def _tree_worker(k, p, n, seed_seq):
    rng = make_rng(seed_seq)
    hits, done, step = 0, 0, _batch_rows(k)
    while done < n:
        b = min(step, n - done)
        tree, _ = sequential_tree_batch(k, p, b, rng)
        hits += int(tree.sum())
        done += b
    return hits


def estimate_prob_tree(k: int, p, n: int, seed: int | None = None, workers: int = 1) -> McEstimate:
    """Indicator-mean estimate of Pr[TREE]."""
    if n < 1 or k < 2:
        raise DomainError("need n >= 1 and k >= 2")
    seed = fresh_seed() if seed is None else seed
    seqs = _seed_sequences(seed, workers)
    jobs = [(k, float(p), share, ss) for share, ss in zip(_shares(n, workers), seqs)]
    hits = sum(_fan_out(_tree_worker, jobs, workers))
    return _indicator_estimate(hits, n, seed, workers, params=_model_params(k, p))


def _tree_worker_inversion(k, p, n, seed_seq):
    rng = make_rng(seed_seq)
    hits, done, step = 0, 0, _batch_rows(k)
    while done < n:
        b = min(step, n - done)
        tree, _ = placements_tree_and_m(sample_placements(k, p, b, rng), k)
        hits += int(tree.sum())
        done += b
    return hits


def estimate_prob_tree_inversion(k: int, p, n: int, seed: int | None = None,
                                 workers: int = 1) -> McEstimate:
    """Same target as :func:`estimate_prob_tree`, from full inverse-CDF placements."""
    seed = fresh_seed() if seed is None else seed
    seqs = _seed_sequences(seed, workers)
    jobs = [(k, float(p), share, ss) for share, ss in zip(_shares(n, workers), seqs)]
    hits = sum(_fan_out(_tree_worker_inversion, jobs, workers))
    return _indicator_estimate(hits, n, seed, workers, params=_model_params(k, p))


# -- escape walks ---------------------------------------------------------------

def _esc_left_worker(lam, L, n, seed_seq):
    rng = make_rng(seed_seq)
    y = np.ones(n, dtype=np.int64)
    escaped = 0
    for i in range(1, L + 1):
        y += rng.poisson(lam, y.size) - 1
        y = y[y > 0]
        # a walk at height >= steps left cannot reach 0 by time L
        safe = y >= L - i + 1
        if safe.any():
            escaped += int(safe.sum())
            y = y[~safe]
        if y.size == 0:
            break
    return escaped + int(y.size)


def _esc_right_worker(lam_r, L, n, seed_seq):
    rng = make_rng(seed_seq)
    y = np.zeros(n, dtype=np.int64)
    for _ in range(L):
        y += 1 - rng.poisson(lam_r, y.size)
        y = y[y > 0]
        if y.size == 0:
            break
    return int(y.size)


def _escape(worker, mean, L, n, seed, workers, params):
    if mean <= 0 or L < 1 or n < 1:
        raise DomainError("need a positive step mean, L >= 1 and n >= 1")
    seed = fresh_seed() if seed is None else seed
    seqs = _seed_sequences(seed, workers)
    jobs = [(float(mean), int(L), share, ss) for share, ss in zip(_shares(n, workers), seqs)]
    hits = sum(_fan_out(worker, jobs, workers))
    return _indicator_estimate(hits, n, seed, workers, params=params)


def estimate_esc_left(lam: float, L: int, n: int, seed: int | None = None,
                      workers: int = 1) -> McEstimate:
    """Fraction of left walks (Y_0 = 1, Poisson(lam) - 1 steps) positive through time L."""
    return _escape(_esc_left_worker, lam, L, n, seed, workers,
                   {"lambda": lam, "L": L, "epsilon": lam - 1})


def estimate_esc_right(lam_r: float, L: int, n: int, seed: int | None = None,
                       workers: int = 1) -> McEstimate:
    """Fraction of right walks (Y_0 = 0, 1 - Poisson(lam_r) steps) positive through time L."""
    return _escape(_esc_right_worker, lam_r, L, n, seed, workers,
                   {"lambda_r": lam_r, "L": L, "epsilon": 1 - lam_r})


# -- conditioned statistics -----------------------------------------------------

def _pilot(k, p, seed):
    rng = make_rng(np.random.SeedSequence([seed, 0x9E3779B9]))
    tree, _ = sequential_tree_batch(k, p, PILOT_DRAWS, rng)
    accepted = int(tree.sum())
    if accepted < MIN_ACCEPTANCE * PILOT_DRAWS:
        raise AcceptanceTooLow(
            f"TREE accepted {accepted}/{PILOT_DRAWS} pilot draws at k={k}, p={p}; "
            "use a larger c = p*k", pilot_draws=PILOT_DRAWS, pilot_accepted=accepted)
    return accepted


def _mstar_worker(k, p, target, seed_seq):
    rng = make_rng(seed_seq)
    kept, drawn, have = [], 0, 0
    step = _batch_rows(k)
    while have < target:
        tree, m = sequential_tree_batch(k, p, step, rng)
        drawn += step
        m = m[tree]
        kept.append(m)
        have += m.size
    return np.concatenate(kept)[:target] if kept else np.zeros(0, np.int64), drawn


def standardization(k: int, p):
    """Exact (when p is rational) mean and standard deviation of the unconditioned M."""
    mu = mean_M(k, p)
    var = var_M(k, p)
    if is_exact(p):
        return float(Fraction(mu)), math.sqrt(Fraction(var))
    return float(mu), math.sqrt(float(var))


def sample_mstar(k: int, p, n_accepted: int, seed: int, workers: int = 1):
    """Draw n_accepted values of M* by rejection; returns (values, total draws)."""
    _pilot(k, float(p), seed)
    seqs = _seed_sequences(seed, workers)
    jobs = [(k, float(p), share, ss) for share, ss in zip(_shares(n_accepted, workers), seqs)]
    parts = _fan_out(_mstar_worker, jobs, workers)
    values = np.concatenate([v for v, _ in parts])
    return values, sum(d for _, d in parts)


def sample_mstar_clt(k: int, p, n_accepted_target: int, u_grid=(-1.0, 0.0, 1.0),
                     seed: int | None = None, workers: int = 1) -> CltReport:
    """Empirical P[M* <= mu + u sigma] against Phi(u), mu and sigma of the unconditioned M."""
    if k < 2 or n_accepted_target < 1:
        raise DomainError("need k >= 2 and a positive accepted target")
    seed = fresh_seed() if seed is None else seed
    values, draws = sample_mstar(k, p, n_accepted_target, seed, workers)
    mu, sigma = standardization(k, p)
    u_grid = [float(u) for u in u_grid]
    if sigma > 0:
        z = (values - mu) / sigma
        empirical = [float(np.mean(z <= u)) for u in u_grid]
    else:
        empirical = [float(np.mean(values <= mu)) for _ in u_grid]
    gaussian = [float(norm.cdf(u)) for u in u_grid]
    dev = max(abs(a - b) for a, b in zip(empirical, gaussian)) if u_grid else 0.0
    return CltReport(k=k, p=float(p), u_grid=u_grid, empirical=empirical, gaussian=gaussian,
                     max_abs_dev=dev, accepted=int(values.size), draws=draws, mu=mu,
                     sigma=sigma, seed=seed, workers=workers)


def _a3_worker(k, p, l, n, seed_seq):
    rng = make_rng(seed_seq)
    hits = accepted = done = 0
    step = _batch_rows(k)
    while done < n:
        b = min(step, n - done)
        tree, m = sequential_tree_batch(k, p, b, rng)
        m = m[tree]
        accepted += m.size
        hits += int(np.count_nonzero(rng.binomial(m, p) == l))
        done += b
    return hits, accepted


def estimate_a3(k: int, p, l: int, n: int, seed: int | None = None, workers: int = 1) -> McEstimate:
    """Estimate Pr[BIN[M*, p] = l] from n placements, averaging over the TREE ones."""
    if l < 0 or n < 1:
        raise DomainError("need l >= 0 and n >= 1")
    seed = fresh_seed() if seed is None else seed
    _pilot(k, float(p), seed)
    seqs = _seed_sequences(seed, workers)
    jobs = [(k, float(p), l, share, ss) for share, ss in zip(_shares(n, workers), seqs)]
    parts = _fan_out(_a3_worker, jobs, workers)
    hits = sum(h for h, _ in parts)
    accepted = sum(a for _, a in parts)
    params = dict(_model_params(k, p), l=l)
    return _indicator_estimate(hits, accepted, seed, workers, n=n, params=params)
