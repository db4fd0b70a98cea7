"""Size limits for exact computations.

Defaults can be overridden with the ``CENSUS_LAB_CAPS`` environment variable,
a JSON object whose keys are field names of :class:`Caps`, e.g.::

    CENSUS_LAB_CAPS='{"census_vertices": 150, "exact_joint_k": 40}'
"""

from __future__ import annotations

import dataclasses
import json
import os

from .errors import DomainError

ENV_VAR = "CENSUS_LAB_CAPS"


@dataclasses.dataclass(frozen=True)
class Caps:
    census_vertices: int = 120      # largest n in the connected-count table
    census_edges: int = 600         # largest edge count m in the table
    exact_tree_k: int = 200         # exact-rational Pr[TREE] DP
    exact_joint_k: int = 30         # exact joint (s, m) DP for the law of M*
    float_tree_k: int = 5000        # float Pr[TREE] DP
    brute_force_k: int = 7          # k^(k-1) enumeration oracle
    graph_trials: int = 10_000_000  # rejection budget of the graph sampler


def load_caps(env=None) -> Caps:
    env = os.environ if env is None else env
    raw = env.get(ENV_VAR)
    if not raw:
        return Caps()
    try:
        overrides = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise DomainError(f"{ENV_VAR} is not valid JSON: {exc}") from None
    if not isinstance(overrides, dict):
        raise DomainError(f"{ENV_VAR} must be a JSON object")
    known = {f.name for f in dataclasses.fields(Caps)}
    unknown = set(overrides) - known
    if unknown:
        raise DomainError(f"unknown cap(s) in {ENV_VAR}: {sorted(unknown)}")
    return Caps(**{k: int(v) for k, v in overrides.items()})


def current_caps() -> Caps:
    return load_caps()
