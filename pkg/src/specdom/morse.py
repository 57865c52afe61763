"""Critical vertex classification and ascent basins for vertex functions.

On a triangulated closed surface (every vertex link a single cycle) the
classification counts sign alternations of f - f(v) around the link:
0 alternations with all neighbours below is a local maximum (index 1),
all above a local minimum (index 1 by the same count), 2 alternations a
regular vertex (index 0), and 2k alternations with k >= 2 a saddle of
multiplicity k - 1 and index 1 - k.  Summed over a closed surface the
indices give its Euler characteristic.

Without a usable triangulation only maxima, minima and regular vertices
are meaningful (a cyclic neighbour order is missing), so the fallback
reports those three labels and no indices.

Vertices incident to an edge on which f takes equal values are labelled
degenerate and excluded from index counts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .complexes import SpecdomError, WeightedComplex


@dataclass(frozen=True)
class CriticalReport:
    classification: dict[int, str]
    index: dict[int, int | None]
    multiplicity: dict[int, int]  # saddles only
    tie_edges: tuple[tuple[int, int], ...]
    surface_mode: bool

    def index_sum(self) -> int:
        return sum(v for v in self.index.values() if v is not None)

    def count(self, label: str) -> int:
        return sum(1 for v in self.classification.values() if v == label)


def _simple_adjacency(cx: WeightedComplex) -> dict[int, set[int]]:
    adj: dict[int, set[int]] = {v: set() for v in range(cx.n)}
    for u, v, _ in cx.edges:
        if u != v:
            adj[u].add(v)
            adj[v].add(u)
    return adj


def _vertex_links(cx: WeightedComplex):
    """Cyclic link of each vertex, or None when some link is not a
    single closed cycle (boundary, pinch point, stray triangles)."""
    if cx.triangles is None or not cx.triangles:
        return None
    incident: dict[int, list[tuple[int, int]]] = {v: [] for v in range(cx.n)}
    for a, b, c in cx.triangles:
        incident[a].append((b, c))
        incident[b].append((c, a))
        incident[c].append((a, b))
    links = {}
    for v in range(cx.n):
        opp = incident[v]
        if not opp:
            return None
        nbrs: dict[int, list[int]] = {}
        for x, y in opp:
            nbrs.setdefault(x, []).append(y)
            nbrs.setdefault(y, []).append(x)
        # a single cycle: every link vertex has exactly two link neighbours
        if any(len(s) != 2 for s in nbrs.values()) or len(nbrs) != len(opp):
            return None
        start = min(nbrs)
        cycle = [start, nbrs[start][0]]
        while True:
            a, b = cycle[-2], cycle[-1]
            nxt = [x for x in nbrs[b] if x != a]
            if len(nxt) != 1:
                return None
            if nxt[0] == start:
                break
            cycle.append(nxt[0])
            if len(cycle) > len(nbrs):
                return None
        if len(cycle) != len(nbrs):
            return None
        links[v] = cycle
    return links


def classify_critical(cx: WeightedComplex, f) -> CriticalReport:
    f = np.asarray(f, dtype=float)
    if f.shape != (cx.n,):
        raise SpecdomError("invariant", f"expected vector of length {cx.n}")
    adj = _simple_adjacency(cx)
    ties = tuple(
        sorted(
            (min(u, v), max(u, v))
            for u, v, _ in cx.edges
            if u != v and f[u] == f[v]
        )
    )
    tied = set()
    for u, v in ties:
        tied.add(u)
        tied.add(v)

    links = _vertex_links(cx)
    surface = links is not None

    classification: dict[int, str] = {}
    index: dict[int, int | None] = {}
    multiplicity: dict[int, int] = {}
    for v in range(cx.n):
        if v in tied:
            classification[v] = "degenerate"
            index[v] = None
            continue
        if surface:
            cycle = links[v]
            signs = [1 if f[w] > f[v] else -1 for w in cycle]
            alterations = sum(
                1 for i in range(len(signs)) if signs[i] != signs[i - 1]
            )
            if alterations == 0:
                classification[v] = "local_max" if signs[0] < 0 else "local_min"
                index[v] = 1
            elif alterations == 2:
                classification[v] = "regular"
                index[v] = 0
            else:
                k = alterations // 2
                classification[v] = "saddle"
                index[v] = 1 - k
                multiplicity[v] = k - 1
        else:
            nbrs = adj[v]
            if not nbrs:
                raise SpecdomError("invariant", f"vertex {v} is isolated")
            above = sum(1 for w in nbrs if f[w] > f[v])
            if above == 0:
                classification[v] = "local_max"
            elif above == len(nbrs):
                classification[v] = "local_min"
            else:
                classification[v] = "regular"
            index[v] = None
    return CriticalReport(
        classification=classification,
        index=index,
        multiplicity=multiplicity,
        tie_edges=ties,
        surface_mode=surface,
    )


@dataclass(frozen=True)
class BasinDecomposition:
    """Steepest-ascent basins of a tie-free vertex function.

    ``parent`` maps each vertex to its unique strictly-larger steepest
    neighbour (None at local maxima), ``basin`` maps each vertex to the
    id of the local maximum its ascent path reaches, ``ridges`` lists
    the edges joining distinct basins.
    """

    parent: dict[int, int | None]
    basin: dict[int, int]
    roots: tuple[int, ...]
    ridges: tuple[tuple[int, int], ...]

    def members(self, root: int) -> list[int]:
        return sorted(v for v, r in self.basin.items() if r == root)


def ascend_basins(cx: WeightedComplex, f) -> BasinDecomposition:
    """Partition vertices by steepest ascent to local maxima.

    Rejected when f takes equal values across any edge, or when some
    vertex sees its best ascent value on two different neighbours (the
    destination would be arbitrary); the offending edges are named.
    """
    f = np.asarray(f, dtype=float)
    if f.shape != (cx.n,):
        raise SpecdomError("invariant", f"expected vector of length {cx.n}")
    adj = _simple_adjacency(cx)
    for u, v, _ in cx.edges:
        if u != v and f[u] == f[v]:
            raise SpecdomError("tie", f"equal values across edge ({u},{v})")

    parent: dict[int, int | None] = {}
    for v in range(cx.n):
        ups = [w for w in adj[v] if f[w] > f[v]]
        if not ups:
            parent[v] = None
            continue
        best = max(f[w] for w in ups)
        winners = sorted(w for w in ups if f[w] == best)
        if len(winners) > 1:
            raise SpecdomError(
                "tie",
                f"vertex {v} has equal steepest neighbours via edges "
                f"({v},{winners[0]}) and ({v},{winners[1]})",
            )
        parent[v] = winners[0]

    basin: dict[int, int] = {}

    def root_of(v):
        path = []
        while v not in basin and parent[v] is not None:
            path.append(v)
            v = parent[v]
        r = basin.get(v, v)
        for x in path:
            basin[x] = r
        return r

    for v in range(cx.n):
        basin[v] = root_of(v)
    roots = tuple(sorted(v for v in range(cx.n) if parent[v] is None))
    ridges = tuple(
        sorted(
            (min(u, v), max(u, v))
            for u, v, _ in cx.edges
            if u != v and basin[u] != basin[v]
        )
    )
    return BasinDecomposition(parent=parent, basin=basin, roots=roots, ridges=ridges)
