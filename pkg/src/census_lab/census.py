"""Exact counts of labeled connected graphs by vertices and edges.

The table is filled from the classical decomposition of all graphs on n
labeled vertices by the component that contains vertex 1::

    binom(C(n,2), m) = sum_{j=1..n} binom(n-1, j-1) sum_i conn(j, i) * binom(C(n-j,2), m-i)

which is solved for conn(n, m).  Per vertex count this is a sum of polynomial
products in the edge variable; the polynomials are packed into single big
integers (Kronecker substitution) so every product is one big-integer
multiplication.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

from .config import current_caps
from .errors import CapExceeded, DomainError

try:
    import gmpy2

    _mpz = gmpy2.mpz
except ImportError:  # pragma: no cover - gmpy2 is optional
    _mpz = int


def binomial(n: int, r: int) -> int:
    """n choose r as an exact integer; 0 when r > n."""
    if n < 0 or r < 0:
        raise DomainError(f"binomial needs nonnegative arguments, got ({n}, {r})")
    return math.comb(n, r)


def max_complexity(k: int) -> int:
    """Complexity of the complete graph on k vertices."""
    if k < 1:
        raise DomainError(f"k must be positive, got {k}")
    if k == 1:
        return 0
    return math.comb(k, 2) - k + 1


@dataclass(frozen=True)
class CountTable:
    """Connected counts conn(n, m) for n <= max_vertices, m <= max_edges.

    ``rows[n][m]`` holds conn(n, m); row 0 is unused.  Instances are never
    mutated after construction.
    """

    max_vertices: int
    max_edges: int
    rows: tuple = field(repr=False)

    def get(self, n: int, m: int) -> int:
        if n < 1:
            raise DomainError(f"vertex count must be positive, got {n}")
        if m < 0 or m > math.comb(n, 2):
            return 0
        if n > self.max_vertices or m > self.max_edges:
            raise CapExceeded(
                f"conn({n}, {m}) outside table bounds "
                f"({self.max_vertices} vertices, {self.max_edges} edges)"
            )
        return self.rows[n][m]

    def row(self, n: int) -> list[int]:
        """All stored counts for n vertices, indexed by edge count."""
        return list(self.rows[n])

    def entries(self):
        for n in range(1, self.max_vertices + 1):
            for m, value in enumerate(self.rows[n]):
                yield (n, m), value


def _pack(coeffs, slot_bytes):
    buf = b"".join(int(c).to_bytes(slot_bytes, "little") for c in coeffs)
    return _mpz(int.from_bytes(buf, "little"))


def _unpack(value, slot_bytes, count):
    value = int(value)
    raw = value.to_bytes(max(1, (value.bit_length() + 7) // 8), "little")
    out = []
    for d in range(count):
        chunk = raw[d * slot_bytes:(d + 1) * slot_bytes]
        out.append(int.from_bytes(chunk, "little") if chunk else 0)
    return out


def build_table(max_vertices: int, max_edges: int) -> CountTable:
    """Fill conn(n, m) for all n <= max_vertices and m <= max_edges."""
    if max_vertices < 1 or max_edges < 0:
        raise DomainError("table bounds must be positive")
    N, M = max_vertices, max_edges
    top = math.comb(N, 2)
    # Largest coefficient any truncated product can reach, degree <= 2M.
    widest = math.comb(top, min(2 * M, top // 2))
    slot_bytes = (widest.bit_length() + 1) // 8 + 1

    all_graphs = [[math.comb(math.comb(n, 2), d) for d in range(M + 1)] for n in range(N + 1)]
    packed_all = [_pack(row, slot_bytes) for row in all_graphs]
    packed_conn = [None] * (N + 1)
    rows = [()] * (N + 1)

    for n in range(1, N + 1):
        acc = _mpz(0)
        for j in range(1, n):
            acc += math.comb(n - 1, j - 1) * (packed_conn[j] * packed_all[n - j])
        disconnected = _unpack(acc, slot_bytes, M + 1)
        row = tuple(g - d for g, d in zip(all_graphs[n], disconnected))
        rows[n] = row
        packed_conn[n] = _pack(row, slot_bytes)
    return CountTable(max_vertices=N, max_edges=M, rows=tuple(rows))


_lock = threading.Lock()
_table: CountTable | None = None


def get_table(n: int, m: int) -> CountTable:
    """Shared table covering at least (n, m); grown on demand within caps."""
    global _table
    caps = current_caps()
    if n > caps.census_vertices or m > caps.census_edges:
        raise CapExceeded(
            f"conn({n}, {m}) exceeds caps "
            f"({caps.census_vertices} vertices, {caps.census_edges} edges)"
        )
    with _lock:
        table = _table
        if table is None or n > table.max_vertices or m > table.max_edges:
            nv = max(n, table.max_vertices if table else 0, 12)
            ne = max(m, table.max_edges if table else 0, 66)
            table = build_table(min(nv, caps.census_vertices), min(ne, caps.census_edges))
            _table = table
    return table


def count_connected(k: int, l: int) -> int:
    """Number of labeled connected graphs on k vertices with k - 1 + l edges."""
    if k < 1:
        raise DomainError(f"k must be positive, got {k}")
    if l < 0 or l > max_complexity(k):
        return 0
    if l == 0:
        return k ** (k - 2) if k >= 2 else 1
    m = k - 1 + l
    return get_table(k, m).get(k, m)
