"""Trivalent graph of integer 3-vectors under the rule x = 2(u+v) - w.

The generation rule is the vector form of the third-order recurrence
x(n+3) = 2(x(n+2)+x(n+1)) - x(n).  Triples closed under it (norm equals
coordinate sum, plus three dot-product conditions) stay closed when any
vector is replaced by a generated neighbor, which yields an infinite
trivalent graph whose vectors all solve x^2 + y^2 + z^2 = (x+y+z)^2.

The observation scanner turns the zigzag sequence of the canonical seed into
checkable numeric findings (entries factor as Fibonacci products, prefix-sum
patterns, the fourth-power-minus-one products, ...); the prover can then
promote the observed patterns to theorems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .expr import fib_value

DEFAULT_FIB_TABLE = 90
EXPANSION_DEPTH_CAP = 16


@dataclass(frozen=True)
class Vec3:
    x1: int
    x2: int
    x3: int

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x1 + other.x1, self.x2 + other.x2, self.x3 + other.x3)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x1 - other.x1, self.x2 - other.x2, self.x3 - other.x3)

    def scale(self, c: int) -> "Vec3":
        return Vec3(c * self.x1, c * self.x2, c * self.x3)

    def dot(self, other: "Vec3") -> int:
        return self.x1 * other.x1 + self.x2 * other.x2 + self.x3 * other.x3

    @property
    def norm_sq(self) -> int:
        return self.dot(self)

    @property
    def coordinate_sum(self) -> int:
        return self.x1 + self.x2 + self.x3

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.x1, self.x2, self.x3)

    def __str__(self) -> str:
        return f"({self.x1},{self.x2},{self.x3})"


@dataclass(frozen=True)
class Triple:
    u: Vec3
    v: Vec3
    w: Vec3

    def vectors(self) -> tuple[Vec3, Vec3, Vec3]:
        return (self.u, self.v, self.w)

    def canonical_key(self) -> tuple[tuple[int, int, int], ...]:
        """Set semantics: the graph is undirected and triples are unordered."""
        return tuple(sorted(v.as_tuple() for v in self.vectors()))

    def __str__(self) -> str:
        return "|".join(str(v) for v in self.vectors())


@dataclass(frozen=True)
class TriGraphNode:
    triple: Triple
    depth: int
    parent: Optional[int]  # index into the expansion list; None for the seed


CANONICAL_SEED = Triple(Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1))


def f_generate(e3: Vec3, e2: Vec3, e1: Vec3) -> Vec3:
    """2*(e3 + e2) - e1; the order of the first two versus the last matters."""
    return (e3 + e2).scale(2) - e1


def f_sequence(e1: Vec3, e2: Vec3, e3: Vec3, count: int) -> list[Vec3]:
    """Zigzag vector sequence e(n+1) = 2*(e(n) + e(n-1)) - e(n-2).

    The first three terms are the seed itself.
    """
    if count < 3:
        raise ValueError("count must be at least 3")
    seq = [e1, e2, e3]
    while len(seq) < count:
        seq.append(f_generate(seq[-1], seq[-2], seq[-3]))
    return seq


def _sum_is_norm(vec: Vec3) -> bool:
    s = vec.coordinate_sum
    return s >= 0 and s * s == vec.norm_sq


def is_f_triple(t: Triple, strict_square_norms: bool = False) -> bool:
    """Norms must equal coordinate sums exactly, and the three dot-product
    relations must hold with those sums as the norm values.

    strict_square_norms additionally demands the sums be perfect squares;
    that stricter reading rejects most generated triples and is off by
    default.
    """
    u, v, w = t.vectors()
    if not all(_sum_is_norm(x) for x in (u, v, w)):
        return False
    nu, nv, nw = (x.coordinate_sum for x in (u, v, w))
    if strict_square_norms:
        for s in (nu, nv, nw):
            r = math.isqrt(s)
            if r * r != s:
                return False
    uv, uw, vw = u.dot(v), u.dot(w), v.dot(w)
    return (
        2 * uv - vw - uw == 2 * nu * nv - nv * nw - nw * nu
        and 2 * uw - vw - uv == 2 * nu * nw - nv * nw - nv * nu
        and 2 * vw - uv - uw == 2 * nv * nw - nv * nu - nw * nu
    )


def children(t: Triple) -> tuple[Vec3, Vec3, Vec3]:
    """Neighbor vectors x = 2(u+v)-w, y = 2(w+v)-u, z = 2(w+u)-v."""
    u, v, w = t.vectors()
    x = (u + v).scale(2) - w
    y = (w + v).scale(2) - u
    z = (w + u).scale(2) - v
    return (x, y, z)


def child_triples(t: Triple) -> tuple[Triple, Triple, Triple]:
    u, v, w = t.vectors()
    x, y, z = children(t)
    return (Triple(u, v, x), Triple(v, w, y), Triple(u, w, z))


def expand_graph(seed: Triple, depth: int) -> list[TriGraphNode]:
    """Breadth-first expansion of the trivalent graph, deduplicating triples."""
    if depth < 0 or depth > EXPANSION_DEPTH_CAP:
        raise ValueError(f"depth must be in [0, {EXPANSION_DEPTH_CAP}]")
    if not is_f_triple(seed):
        raise ValueError("seed is not an F-triple")
    nodes = [TriGraphNode(seed, 0, None)]
    seen = {seed.canonical_key(): 0}
    frontier = [0]
    for level in range(1, depth + 1):
        next_frontier: list[int] = []
        for idx in frontier:
            for child in child_triples(nodes[idx].triple):
                key = child.canonical_key()
                if key in seen:
                    continue
                seen[key] = len(nodes)
                nodes.append(TriGraphNode(child, level, idx))
                next_frontier.append(seen[key])
        frontier = next_frontier
    return nodes


def graph_edges(nodes: Sequence[TriGraphNode]) -> list[tuple[int, int]]:
    return [(node.parent, i) for i, node in enumerate(nodes) if node.parent is not None]


def pythagorean_param(m: int, n: int) -> Vec3:
    """(mn, m(m+n), n(m+n)); always solves x^2+y^2+z^2 = (x+y+z)^2."""
    return Vec3(m * n, m * (m + n), n * (m + n))


# ---------------------------------------------------------------------------
# Observation scanner


@dataclass(frozen=True)
class ObservationReport:
    """One finding per observed pattern of the canonical zigzag sequence."""

    entries_are_fib_products: bool                      # (a)
    fib_product_form_first_break: Optional[int]         # (a) closed form, 1-based
    norm_equals_sum: bool                               # (b)
    half_step_differences_are_fib: bool                 # (c)
    first_entry_prefix_sums_are_neg_fib_squares: bool   # (i), window start e4
    neg_square_prefix_matching_starts: tuple[int, ...]  # (i), all matching starts (0-based)
    second_entry_prefix_sums_are_fib_products: bool     # (ii)
    alternating_sum_is_unit: bool                       # (iii): x1 - x2 + x3 = +-1
    half_step_differences_telescope: bool               # (iv): C-c = (B-b)+(A-a)
    first_third_products_are_fib_fourth_minus_one: bool  # (v)
    first_third_products: tuple[tuple[int, int, int, int], ...]  # (a, A, a*A, fib base)


def _fib_table(size: int) -> list[int]:
    return [fib_value(i) for i in range(size + 1)]


def _is_fib_product(value: int, table: Sequence[int]) -> bool:
    value = abs(value)
    fib_set = set(table)
    if value == 0:
        return True
    for f in table:
        if f == 0:
            continue
        if f * f > value:
            break
        if value % f == 0 and value // f in fib_set:
            return True
    return False


def _is_fib(value: int, table: Sequence[int]) -> bool:
    return abs(value) in set(table)


def _fib_fourth_root(value: int, table: Sequence[int]) -> Optional[int]:
    for f in table:
        if f**4 == value:
            return f
        if f**4 > value:
            return None
    return None


def _closed_form_break(seq: Sequence[Vec3]) -> Optional[int]:
    # Term p (1-based) is compared against k = p - 3, Fibonacci indices
    # running negative for the seed itself.
    for p, vec in enumerate(seq, start=1):
        k = p - 3
        expected = Vec3(
            -fib_value(k) * fib_value(k + 1),
            fib_value(k) * fib_value(k + 2),
            fib_value(k + 1) * fib_value(k + 2),
        )
        if vec != expected:
            return p
    return None


def _neg_square_prefix_starts(seq: Sequence[Vec3], table: Sequence[int]) -> tuple[int, ...]:
    squares = {f * f for f in table}
    matches = []
    for start in range(len(seq)):
        windows = [L for L in range(1, len(seq) - start + 1, 2)]
        if len(windows) < 2:
            continue
        ok = True
        for length in windows:
            total = sum(v.x1 for v in seq[start : start + length])
            if total > 0 or -total not in squares:
                ok = False
                break
        if ok:
            matches.append(start)
    return tuple(matches)


def scan_observations(
    seq: Sequence[Vec3], fib_table_size: int = DEFAULT_FIB_TABLE
) -> ObservationReport:
    table = _fib_table(fib_table_size)

    entries_ok = all(
        _is_fib_product(c, table) for v in seq for c in v.as_tuple()
    )
    norm_ok = all(_sum_is_norm(v) for v in seq)
    diffs_ok = all(
        all(_is_fib(c, table) for c in (seq[i] - seq[i - 2]).as_tuple())
        for i in range(2, len(seq))
    )
    alt_ok = all(v.x1 - v.x2 + v.x3 in (1, -1) for v in seq)

    telescope_ok = True
    for i in range(2, len(seq)):
        a, b, c = -seq[i - 2].x1, seq[i - 2].x2, seq[i - 2].x3
        aa, bb, cc = -seq[i].x1, seq[i].x2, seq[i].x3
        if cc - c != (bb - b) + (aa - a):
            telescope_ok = False
            break

    products: list[tuple[int, int, int, int]] = []
    products_ok = True
    for i in range(2, len(seq)):
        a = -seq[i - 2].x1
        big_a = seq[i].x3
        prod = a * big_a
        root = _fib_fourth_root(prod + 1, table)
        if root is None:
            products_ok = False
        else:
            products.append((a, big_a, prod, root))

    starts = _neg_square_prefix_starts(seq, table)
    second_ok = False
    if len(seq) > 3:
        second_ok = True
        total = 0
        for v in seq[3:]:
            total += v.x2
            if not _is_fib_product(total, table):
                second_ok = False
                break

    return ObservationReport(
        entries_are_fib_products=entries_ok,
        fib_product_form_first_break=_closed_form_break(seq),
        norm_equals_sum=norm_ok,
        half_step_differences_are_fib=diffs_ok,
        first_entry_prefix_sums_are_neg_fib_squares=3 in starts,
        neg_square_prefix_matching_starts=starts,
        second_entry_prefix_sums_are_fib_products=second_ok,
        alternating_sum_is_unit=alt_ok,
        half_step_differences_telescope=telescope_ok,
        first_third_products_are_fib_fourth_minus_one=products_ok,
        first_third_products=tuple(products),
    )


# ---------------------------------------------------------------------------
# Exports


def graph_to_dict(nodes: Sequence[TriGraphNode]) -> dict:
    return {
        "nodes": [
            {
                "id": i,
                "depth": node.depth,
                "triple": [list(v.as_tuple()) for v in node.triple.vectors()],
            }
            for i, node in enumerate(nodes)
        ],
        "edges": [[a, b] for a, b in graph_edges(nodes)],
    }


def graph_to_dot(nodes: Sequence[TriGraphNode]) -> str:
    lines = ["graph {"]
    for i, node in enumerate(nodes):
        lines.append(f'  n{i} [label="{node.triple}"];')
    for a, b in graph_edges(nodes):
        lines.append(f"  n{a} -- n{b};")
    lines.append("}")
    return "\n".join(lines)
