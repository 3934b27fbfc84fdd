"""Geometry of an interval row: the polytope {p : sum(p) = 1, lo <= p <= hi}.

Provides exact vertex (corner point) enumeration and greedy selection of the
extreme distribution optimizing a linear objective, which avoids touching the
full (worst-case exponential) vertex set during value iteration.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InfeasibleRowError
from .model import Distribution, IntervalRow

VERTEX_TOL = 1e-12


@dataclass(frozen=True)
class BfsSet:
    """All polytope vertices of one interval row, canonically ordered."""

    action: int
    vertices: tuple[Distribution, ...]


def _check_feasible(row: IntervalRow) -> None:
    if not row.is_feasible():
        raise InfeasibleRowError(
            f"row of action {row.action} admits no distribution "
            f"(lo sum {row.lo_sum():g}, hi sum {row.hi_sum():g})"
        )


def bfs_vertices(row: IntervalRow) -> BfsSet:
    """Enumerate exactly the vertices of the row's distribution polytope.

    For each candidate free coordinate, every other coordinate is pinned to
    its lower or upper bound and the free one takes the remaining mass; the
    candidate is kept iff that mass lies within its own bounds.  Vertices are
    deduplicated with coordinate tolerance ``VERTEX_TOL`` and ordered
    lexicographically by coordinate vector.
    """
    _check_feasible(row)
    succs = row.successors
    los = [row.bounds[s].lo for s in succs]
    his = [row.bounds[s].hi for s in succs]
    k = len(succs)
    found: list[tuple[float, ...]] = []

    def push(coords: tuple[float, ...]) -> None:
        for seen in found:
            if all(abs(a - b) <= VERTEX_TOL for a, b in zip(seen, coords)):
                return
        found.append(coords)

    for j in range(k):
        others = [i for i in range(k) if i != j]
        for mask in range(1 << len(others)):
            coords = [0.0] * k
            total = 0.0
            for bit, i in enumerate(others):
                coords[i] = his[i] if mask >> bit & 1 else los[i]
                total += coords[i]
            free = 1.0 - total
            if los[j] - VERTEX_TOL <= free <= his[j] + VERTEX_TOL:
                coords[j] = min(max(free, los[j]), his[j])
                push(tuple(coords))
    if not found:
        raise InfeasibleRowError(f"row of action {row.action} yields no vertex")
    found.sort()
    vertices = tuple(
        {s: p for s, p in zip(succs, coords) if p > VERTEX_TOL} for coords in found
    )
    return BfsSet(action=row.action, vertices=vertices)


def extreme_distribution(
    row: IntervalRow,
    values,
    sense: str,
    prefer: frozenset[int] | set[int] | None = None,
) -> Distribution:
    """Greedy vertex optimizing ``sum(p[s] * values[s])`` in the given sense.

    All coordinates start at their lower bound; successors are then raised
    toward their upper bound in value order (descending for ``max``,
    ascending for ``min``, ties by ascending state index) until the mass
    reaches 1.  The result is always a polytope vertex.

    ``prefer`` optionally breaks exact value ties in favour of the given
    states without changing the achieved objective; the default tie-break is
    the ascending state index alone.
    """
    _check_feasible(row)
    succs = row.successors
    if sense == "max":
        def key(s):
            return (-values[s], 0 if prefer is not None and s in prefer else 1, s)
    elif sense == "min":
        def key(s):
            return (values[s], 0 if prefer is not None and s in prefer else 1, s)
    else:
        raise ValueError(f"sense must be 'max' or 'min', got {sense!r}")
    order = sorted(succs, key=key)
    dist = {s: row.bounds[s].lo for s in succs}
    remaining = 1.0 - sum(dist.values())
    for s in order:
        if remaining <= VERTEX_TOL:
            break
        room = row.bounds[s].hi - dist[s]
        step = min(room, remaining)
        if step > 0:
            dist[s] += step
            remaining -= step
    return {s: p for s, p in dist.items() if p > VERTEX_TOL}
