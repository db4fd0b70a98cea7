"""Uniform random labeled connected graphs with k vertices and complexity l.

Breadth-first search from root 0 turns a TREE placement of balls 1..k-1
(ball j is vertex j, T_j the stage at which it is first seen) into a spanning
tree: the vertex popped at stage i is the i-th vertex ever enqueued, and the
balls in bin i become its children, enqueued by increasing label.  The pairs
(popped vertex, vertex already waiting in the queue) are exactly the pairs
the search never looked at; there are M of them.  Drawing each with
probability p and keeping the result only when exactly l are drawn gives
every connected graph with k - 1 + l edges the same probability.

Per trial we draw the number of extra edges as BIN(M, p) and, on a hit,
a uniform l-subset of the eligible pairs; conditioned on its size, the set of
independently drawn pairs is uniform, so this is the same procedure.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .census import max_complexity
from .config import current_caps
from .errors import BudgetExhausted, DomainError
from .montecarlo import (
    _fan_out, _indicator_estimate, _seed_sequences, _shares, fresh_seed, make_rng,
    placements_tree_and_m, sample_placements,
)
from .tilt import solve_tilt

_BATCH = 4096


@dataclass(frozen=True)
class LabeledGraph:
    k: int
    edges: tuple          # sorted (u, v) pairs with u < v

    @property
    def complexity(self) -> int:
        return len(self.edges) - self.k + 1

    def is_connected(self) -> bool:
        adj = [[] for _ in range(self.k)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        seen = {0}
        stack = [0]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.k

    def to_edge_list(self) -> str:
        return "\n".join(f"{u} {v}" for u, v in self.edges)

    def to_dict(self) -> dict:
        return {"k": self.k, "l": self.complexity, "edges": [list(e) for e in self.edges]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def default_tilt(k: int, l: int) -> float:
    """Tilt centring BIN[M*, p] on l; for trees aim at half an extra edge."""
    target = l if l >= 1 else 0.5
    if target >= max_complexity(k):
        return 1.0
    return solve_tilt(k, target)


def bfs_tree(T):
    """Spanning tree edges and eligible pairs for a TREE placement T (ball j at T[j-1])."""
    k = len(T) + 1
    children = [[] for _ in range(k + 1)]
    for j, t in enumerate(T, start=1):
        children[int(t)].append(j)
    order = [0]
    tree_edges, eligible = [], []
    for stage in range(1, k + 1):
        if stage > len(order):
            raise DomainError("placement does not satisfy TREE")
        popped = order[stage - 1]
        for waiting in order[stage:]:
            eligible.append((min(popped, waiting), max(popped, waiting)))
        for child in children[stage]:   # labels already increasing
            tree_edges.append((popped, child))
            order.append(child)
    return tree_edges, eligible


def _trial_batch(k, l, p, size, rng):
    """Run ``size`` trials; return placements of the accepted ones."""
    T = sample_placements(k, p, size, rng)
    tree, m = placements_tree_and_m(T, k)
    extra = np.full(size, -1)
    extra[tree] = rng.binomial(m[tree], p)
    hit = extra == l
    return T[hit]


def _assemble(k, l, T, rng):
    tree_edges, eligible = bfs_tree(T)
    if l:
        pick = rng.choice(len(eligible), size=l, replace=False)
        chosen = [eligible[i] for i in sorted(pick)]
    else:
        chosen = []
    edges = [(min(u, v), max(u, v)) for u, v in tree_edges] + chosen
    return LabeledGraph(k, tuple(sorted(edges)))


def _graph_worker(k, l, p, count, budget, seed_seq):
    rng = make_rng(seed_seq)
    graphs, trials = [], 0
    while len(graphs) < count:
        if trials >= budget:
            raise BudgetExhausted(
                f"no more than {len(graphs)} of {count} graphs after {trials} trials at p={p}")
        size = min(_BATCH, budget - trials)
        for T in _trial_batch(k, l, p, size, rng):
            if len(graphs) == count:
                break
            graphs.append(_assemble(k, l, T, rng))
        trials += size
    return graphs


def _check(k, l):
    if k < 2:
        raise DomainError(f"k must be at least 2, got {k}")
    if not 0 <= l <= max_complexity(k):
        raise DomainError(f"l = {l} outside [0, {max_complexity(k)}] for k = {k}")


def sample_connected_graphs(k: int, l: int, count: int = 1, seed: int | None = None,
                            p: float | None = None, workers: int = 1,
                            max_trials: int | None = None) -> list[LabeledGraph]:
    """``count`` independent uniform connected graphs on k vertices, complexity l."""
    _check(k, l)
    if count < 1:
        return []
    seed = fresh_seed() if seed is None else seed
    p = default_tilt(k, l) if p is None else float(p)
    if not 0 < p <= 1:
        raise DomainError(f"tilt p must lie in (0, 1], got {p}")
    budget = current_caps().graph_trials if max_trials is None else max_trials
    seqs = _seed_sequences(seed, workers)
    shares = _shares(count, workers)
    jobs = [(k, l, p, share, budget, ss) for share, ss in zip(shares, seqs) if share]
    parts = _fan_out(_graph_worker, jobs, workers)
    return [g for part in parts for g in part]


def sample_connected_graph(k: int, l: int, seed: int | None = None, p: float | None = None,
                           max_trials: int | None = None) -> LabeledGraph:
    return sample_connected_graphs(k, l, 1, seed=seed, p=p, max_trials=max_trials)[0]


def acceptance_rate(k: int, l: int, n: int, seed: int | None = None, p: float | None = None):
    """Fraction of n trials accepted; its target is Pr[TREE] * Pr[BIN[M*, p] = l]."""
    _check(k, l)
    seed = fresh_seed() if seed is None else seed
    p = default_tilt(k, l) if p is None else float(p)
    rng = make_rng(_seed_sequences(seed, 1)[0])
    hits = done = 0
    while done < n:
        size = min(_BATCH, n - done)
        hits += len(_trial_batch(k, l, p, size, rng))
        done += size
    est = _indicator_estimate(hits, n, seed, 1, params={"k": k, "l": l, "p": p})
    expected = 1 / est.mean if est.mean else math.inf
    if expected > current_caps().graph_trials:
        warnings.warn(f"expected {expected:.3g} trials per graph exceeds the trial budget")
    return est
