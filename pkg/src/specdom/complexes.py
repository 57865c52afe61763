"""Weighted complexes and Laplacian assembly.

A :class:`WeightedComplex` is the discrete stand-in for a Riemannian
manifold: vertices carry positive measures (volume elements), edges carry
positive conductances (metric couplings), and an optional triangulation
with intrinsic edge lengths replaces the raw conductances by cotangent
weights with lumped triangle-area measures.

Boundary conditions are encoded as vertex tags.  Vertices tagged
``"dirichlet"`` are pinned to zero and removed from the operator domain;
``"interior"`` and ``"neumann"`` vertices are free (the natural condition
is simply the absence of a constraint).  An edge from a free vertex into a
pinned vertex survives as a diagonal closure term, so the discrete Green
identity holds with no boundary correction.

Sign convention: the operator is positive,

    (L f)(v) = (1/mu(v)) * [ sum_{w ~ v, w free} c(vw) (f(v) - f(w))
                             + f(v) * sum_{w ~ v pinned} c(vw) ].
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

VERTEX_TAGS = ("interior", "neumann", "dirichlet")

# Cotangent weights with magnitude at or below this are snapped to zero;
# anything more negative is rejected.
COT_SNAP = 1e-12


class SpecdomError(ValueError):
    """Rejection of invalid input, carrying a stable machine-readable code.

    Codes in use: schema, invariant, positivity, disconnected,
    negative_cotangent, k_too_large, tie, truncation, orthogonality,
    degenerate, margin, fit, divergence, dimension, overwrite, convergence.
    """

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def _canon_pair(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u <= v else (v, u)


@dataclass(frozen=True)
class WeightedComplex:
    """Vertex-weighted, edge-weighted graph with optional triangulation.

    Parameters
    ----------
    vertices : sequence of (id, measure, tag)
        Ids must be exactly 0..n-1 in order, measures strictly positive,
        tags drawn from ``VERTEX_TAGS``.
    edges : sequence of (u, v, conductance)
        Conductances strictly positive.  Loops (u == v) are permitted and
        carry no Laplacian contribution.  Parallel edges are permitted on
        plain graphs but not on triangulated complexes.
    triangles : sequence of (a, b, c), optional
        When present, ``edge_lengths`` must be supplied, conductances are
        ignored by assembly, and the cotangent weights take over.
    edge_lengths : mapping (u, v) -> length, optional
        Keyed by canonical pairs (u <= v).  Required and permitted only
        alongside ``triangles``.  Every triangle side must have a length
        and satisfy the strict triangle inequality.
    """

    vertices: tuple[tuple[int, float, str], ...]
    edges: tuple[tuple[int, int, float], ...]
    triangles: tuple[tuple[int, int, int], ...] | None = None
    edge_lengths: tuple[tuple[int, int, float], ...] | None = None

    def __init__(self, vertices, edges, triangles=None, edge_lengths=None):
        vtx = tuple((int(i), float(m), str(t)) for i, m, t in vertices)
        edg = tuple((int(u), int(v), float(c)) for u, v, c in edges)
        tri = None
        if triangles is not None:
            tri = tuple(tuple(int(a) for a in t) for t in triangles)
        elen = None
        if edge_lengths is not None:
            if hasattr(edge_lengths, "items"):
                items = [(k[0], k[1], l) for k, l in edge_lengths.items()]
            else:
                items = list(edge_lengths)
            elen = tuple(
                sorted((*_canon_pair(int(u), int(v)), float(l)) for u, v, l in items)
            )
        object.__setattr__(self, "vertices", vtx)
        object.__setattr__(self, "edges", edg)
        object.__setattr__(self, "triangles", tri)
        object.__setattr__(self, "edge_lengths", elen)
        self._validate()

    # -- validation -----------------------------------------------------

    def _validate(self):
        n = len(self.vertices)
        for pos, (vid, mu, tag) in enumerate(self.vertices):
            if vid != pos:
                raise SpecdomError(
                    "schema",
                    f"vertex ids must be dense 0..{n - 1} in order, "
                    f"got id {vid} at position {pos}",
                )
            if not (mu > 0.0) or not np.isfinite(mu):
                raise SpecdomError(
                    "invariant", f"vertex {vid} has non-positive measure {mu}"
                )
            if tag not in VERTEX_TAGS:
                raise SpecdomError("schema", f"vertex {vid} has unknown tag {tag!r}")
        for u, v, c in self.edges:
            if not (0 <= u < n and 0 <= v < n):
                raise SpecdomError("schema", f"edge ({u},{v}) references missing vertex")
            if not (c > 0.0) or not np.isfinite(c):
                raise SpecdomError(
                    "invariant", f"edge ({u},{v}) has non-positive conductance {c}"
                )
        if (self.triangles is None) != (self.edge_lengths is None):
            raise SpecdomError(
                "schema", "triangles and edge_lengths must be supplied together"
            )
        if self.triangles is not None:
            self._validate_triangulation(n)

    def _validate_triangulation(self, n: int):
        pairs = set()
        for u, v, c in self.edges:
            if u == v:
                raise SpecdomError("schema", f"loop ({u},{u}) not allowed with triangles")
            p = _canon_pair(u, v)
            if p in pairs:
                raise SpecdomError(
                    "schema", f"parallel edge {p} not allowed with triangles"
                )
            pairs.add(p)
        lengths = {}
        for u, v, l in self.edge_lengths:
            if not (0 <= u < n and 0 <= v < n):
                raise SpecdomError("schema", f"length key ({u},{v}) references missing vertex")
            if (u, v) not in pairs:
                raise SpecdomError("schema", f"length key ({u},{v}) is not an edge")
            if (u, v) in lengths:
                raise SpecdomError("schema", f"duplicate length key ({u},{v})")
            if not (l > 0.0) or not np.isfinite(l):
                raise SpecdomError("invariant", f"edge ({u},{v}) has non-positive length {l}")
            lengths[(u, v)] = l
        for tri in self.triangles:
            a, b, c = tri
            if len({a, b, c}) != 3:
                raise SpecdomError("schema", f"degenerate triangle {tri}")
            for x in tri:
                if not (0 <= x < n):
                    raise SpecdomError("schema", f"triangle {tri} references missing vertex")
            sides = []
            for x, y in ((a, b), (b, c), (c, a)):
                p = _canon_pair(x, y)
                if p not in lengths:
                    raise SpecdomError(
                        "schema", f"triangle {tri} side {p} has no edge length"
                    )
                sides.append(lengths[p])
            s0, s1, s2 = sorted(sides)
            if not (s0 + s1 > s2):
                raise SpecdomError(
                    "invariant", f"triangle {tri} violates the strict triangle inequality"
                )

    # -- basic accessors ------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def tags(self) -> tuple[str, ...]:
        return tuple(t for _, _, t in self.vertices)

    @property
    def measures(self) -> np.ndarray:
        return np.array([m for _, m, _ in self.vertices], dtype=float)

    def free_ids(self) -> list[int]:
        return [i for i, (_, _, t) in enumerate(self.vertices) if t != "dirichlet"]

    def dirichlet_ids(self) -> list[int]:
        return [i for i, (_, _, t) in enumerate(self.vertices) if t == "dirichlet"]

    def length(self, u: int, v: int) -> float:
        p = _canon_pair(u, v)
        for a, b, l in self.edge_lengths:
            if (a, b) == p:
                return l
        raise KeyError(p)


def _cot_weights(cx: WeightedComplex):
    """Cotangent weights and lumped measures from intrinsic edge lengths.

    Each triangle contributes half the cotangent of the angle opposite an
    edge to that edge's weight, and a third of its Heron area to each
    corner's measure.  Weights in [-COT_SNAP, COT_SNAP] are snapped to
    zero; anything below is rejected with the triangle that contributed
    the most negative part.
    """
    lengths = {(u, v): l for u, v, l in cx.edge_lengths}
    contrib: dict[tuple[int, int], list[tuple[tuple[int, int, int], float]]] = {}
    area_measure = np.zeros(cx.n)
    for tri in cx.triangles:
        a, b, c = tri
        lab = lengths[_canon_pair(a, b)]
        lbc = lengths[_canon_pair(b, c)]
        lca = lengths[_canon_pair(c, a)]
        s = 0.5 * (lab + lbc + lca)
        area = np.sqrt(s * (s - lab) * (s - lbc) * (s - lca))
        for corner in tri:
            area_measure[corner] += area / 3.0
        # angle at each corner, cotangent goes to the opposite edge
        for corner, opp, l_opp in ((a, (b, c), lbc), (b, (c, a), lca), (c, (a, b), lab)):
            adj = [lengths[_canon_pair(corner, x)] for x in opp]
            cos_t = (adj[0] ** 2 + adj[1] ** 2 - l_opp**2) / (2.0 * adj[0] * adj[1])
            sin_t = 2.0 * area / (adj[0] * adj[1])
            contrib.setdefault(_canon_pair(*opp), []).append((tri, 0.5 * cos_t / sin_t))
    weights = {}
    for pair, parts in contrib.items():
        w = sum(x for _, x in parts)
        if w < -COT_SNAP:
            worst = min(parts, key=lambda p: p[1])[0]
            raise SpecdomError(
                "negative_cotangent",
                f"edge {pair} has cotangent weight {w:.3e}, "
                f"offending triangle {worst}",
            )
        weights[pair] = 0.0 if abs(w) <= COT_SNAP else w
    return weights, area_measure


def _effective(cx: WeightedComplex):
    """(edge list with assembled weights, measure vector).

    On plain graphs this is the input data.  On triangulated complexes
    conductances are replaced by cotangent weights (zero-weight entries
    retained) and measures by lumped triangle areas.  Edge order follows
    the input edge list.
    """
    if cx.triangles is None:
        return list(cx.edges), cx.measures
    weights, measure = _cot_weights(cx)
    eff = []
    for u, v, _ in cx.edges:
        eff.append((u, v, weights.get(_canon_pair(u, v), 0.0)))
    return eff, measure


def effective_graph(cx: WeightedComplex) -> WeightedComplex:
    """Strip a triangulated complex down to its assembled graph.

    The result has the cotangent weights as conductances and the lumped
    areas as measures; zero-weight edges are dropped (they carry no
    coupling).  The Laplacian is unchanged.  Plain graphs pass through.
    """
    cx2, _ = effective_graph_with_map(cx)
    return cx2


def effective_graph_with_map(cx: WeightedComplex):
    """Like :func:`effective_graph` but also returns the indices of the
    original edges that survive (zero-weight edges are dropped)."""
    if cx.triangles is None:
        return cx, list(range(len(cx.edges)))
    eff, measure = _effective(cx)
    kept_edges = []
    kept_idx = []
    for i, (u, v, w) in enumerate(eff):
        if w > 0.0:
            kept_edges.append((u, v, w))
            kept_idx.append(i)
    vertices = [(i, measure[i], t) for i, (_, _, t) in enumerate(cx.vertices)]
    return WeightedComplex(vertices, kept_edges), kept_idx


@dataclass(frozen=True)
class LaplacianOperator:
    """Assembled positive Laplacian restricted to the free vertices.

    Attributes
    ----------
    complex : WeightedComplex
        Source data.
    free : ndarray of int
        Original ids of the free vertices, ascending; row/column i of the
        matrices corresponds to ``free[i]``.
    stiffness : scipy.sparse.csr_matrix
        Symmetric PSD form, closure terms included on the diagonal, so
        row sums equal ``dirichlet_closure``.
    mass : ndarray
        Diagonal of the mass matrix (vertex measures on free vertices).
    dirichlet_closure : ndarray
        Per free vertex, total conductance into pinned neighbours.
    effective_edges : tuple of (u, v, w)
        Post-assembly weighted edges with at least one free endpoint,
        positive weight, loops dropped; basis for random walks.
    """

    complex: WeightedComplex
    free: np.ndarray
    stiffness: sp.csr_matrix
    mass: np.ndarray
    dirichlet_closure: np.ndarray
    effective_edges: tuple[tuple[int, int, float], ...]
    index: dict[int, int] = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.free)

    def apply(self, f: np.ndarray) -> np.ndarray:
        """(L f) on the free vertices, mass division included."""
        f = np.asarray(f, dtype=float)
        if f.shape != (self.dim,):
            raise SpecdomError("invariant", f"expected vector of length {self.dim}")
        return (self.stiffness @ f) / self.mass

    def quadratic_form(self, f: np.ndarray) -> float:
        f = np.asarray(f, dtype=float)
        return float(f @ (self.stiffness @ f))

    def dense(self) -> np.ndarray:
        return self.stiffness.toarray()


def assemble_laplacian(cx: WeightedComplex) -> LaplacianOperator:
    """Assemble the free-vertex stiffness and mass data.

    Rejects when no vertex is free or when the free vertices are not
    connected through positive-weight edges (zero-weight cotangent edges
    do not count for connectivity).
    """
    eff, measure = _effective(cx)
    free = [i for i, (_, _, t) in enumerate(cx.vertices) if t != "dirichlet"]
    if not free:
        raise SpecdomError("disconnected", "no free vertices")
    index = {v: i for i, v in enumerate(free)}
    nf = len(free)
    tags = cx.tags

    closure = np.zeros(nf)
    rows, cols, vals = [], [], []
    diag = np.zeros(nf)
    kept = []
    for u, v, w in eff:
        if w <= 0.0 or u == v:
            continue
        fu, fv = tags[u] != "dirichlet", tags[v] != "dirichlet"
        if not (fu or fv):
            continue
        kept.append((u, v, w))
        if fu and fv:
            iu, iv = index[u], index[v]
            diag[iu] += w
            diag[iv] += w
            rows.append(iu)
            cols.append(iv)
            vals.append(-w)
            rows.append(iv)
            cols.append(iu)
            vals.append(-w)
        elif fu:
            closure[index[u]] += w
        else:
            closure[index[v]] += w

    # connectivity of the free subgraph through positive couplings
    adj: dict[int, list[int]] = {v: [] for v in free}
    for u, v, w in kept:
        if u != v and tags[u] != "dirichlet" and tags[v] != "dirichlet":
            adj[u].append(v)
            adj[v].append(u)
    seen = {free[0]}
    stack = [free[0]]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    if len(seen) != nf:
        missing = sorted(set(free) - seen)[:5]
        raise SpecdomError(
            "disconnected",
            f"free subgraph is disconnected, e.g. vertices {missing} "
            f"unreachable from vertex {free[0]}",
        )

    rows.extend(range(nf))
    cols.extend(range(nf))
    vals.extend(diag + closure)
    stiffness = sp.csr_matrix(
        (np.array(vals), (np.array(rows), np.array(cols))), shape=(nf, nf)
    )
    stiffness.sum_duplicates()
    return LaplacianOperator(
        complex=cx,
        free=np.array(free, dtype=int),
        stiffness=stiffness,
        mass=measure[free],
        dirichlet_closure=closure,
        effective_edges=tuple(kept),
        index=index,
    )


@dataclass(frozen=True)
class ExhaustionSpec:
    """Strictly nested vertex subsets, last one the full vertex set."""

    stages: tuple[frozenset[int], ...]

    def __init__(self, stages):
        object.__setattr__(self, "stages", tuple(frozenset(s) for s in stages))
        if not self.stages:
            raise SpecdomError("invariant", "exhaustion needs at least one stage")
        for j in range(len(self.stages) - 1):
            if not self.stages[j] < self.stages[j + 1]:
                raise SpecdomError(
                    "invariant", f"stage {j} is not a strict subset of stage {j + 1}"
                )

    def validate_for(self, cx: WeightedComplex):
        full = set(range(cx.n))
        if set(self.stages[-1]) != full:
            raise SpecdomError(
                "invariant", "final exhaustion stage must be the full vertex set"
            )


def restrict(cx: WeightedComplex, exh: ExhaustionSpec, j: int) -> WeightedComplex:
    """Complex with everything outside stage j pinned to zero.

    Vertices outside the stage are retagged dirichlet, edges between two
    outside vertices are dropped, crossing edges are kept (they feed the
    closure).  Triangulated complexes are first reduced to their
    effective graph, since a partial triangle has no intrinsic meaning.
    """
    if not (0 <= j < len(exh.stages)):
        raise SpecdomError("invariant", f"stage index {j} out of range")
    if cx.triangles is not None:
        cx = effective_graph(cx)
    keep = exh.stages[j]
    for v in keep:
        if not (0 <= v < cx.n):
            raise SpecdomError("invariant", f"stage {j} references missing vertex {v}")
    vertices = [
        (i, m, t if i in keep else "dirichlet")
        for i, (_, m, t) in enumerate(cx.vertices)
    ]
    edges = [(u, v, c) for u, v, c in cx.edges if u in keep or v in keep]
    return WeightedComplex(vertices, edges)


# -- JSON serialization -------------------------------------------------

def complex_to_obj(cx: WeightedComplex) -> dict:
    obj = {
        "vertices": [
            {"id": i, "measure": m, "tag": t} for i, m, t in cx.vertices
        ],
        "edges": [{"u": u, "v": v, "conductance": c} for u, v, c in cx.edges],
    }
    if cx.triangles is not None:
        obj["triangles"] = [list(t) for t in cx.triangles]
        obj["edge_lengths"] = {f"{u}-{v}": l for u, v, l in cx.edge_lengths}
    return obj


def complex_from_obj(obj) -> WeightedComplex:
    if not isinstance(obj, dict):
        raise SpecdomError("schema", "complex document must be a JSON object")
    allowed = {"vertices", "edges", "triangles", "edge_lengths"}
    extra = set(obj) - allowed
    if extra:
        raise SpecdomError("schema", f"unknown top-level fields {sorted(extra)}")
    for key in ("vertices", "edges"):
        if key not in obj:
            raise SpecdomError("schema", f"missing required field {key!r}")
    vertices = []
    for row in obj["vertices"]:
        if not isinstance(row, dict) or set(row) != {"id", "measure", "tag"}:
            raise SpecdomError(
                "schema", f"vertex entries need exactly id, measure, tag: {row!r}"
            )
        vertices.append((row["id"], row["measure"], row["tag"]))
    edges = []
    for row in obj["edges"]:
        if not isinstance(row, dict) or set(row) != {"u", "v", "conductance"}:
            raise SpecdomError(
                "schema", f"edge entries need exactly u, v, conductance: {row!r}"
            )
        edges.append((row["u"], row["v"], row["conductance"]))
    triangles = obj.get("triangles")
    edge_lengths = None
    if "edge_lengths" in obj:
        edge_lengths = {}
        for key, l in obj["edge_lengths"].items():
            parts = key.split("-")
            if len(parts) != 2:
                raise SpecdomError("schema", f"malformed edge length key {key!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise SpecdomError("schema", f"malformed edge length key {key!r}")
            edge_lengths[(u, v)] = l
    return WeightedComplex(vertices, edges, triangles, edge_lengths)


def read_complex(path) -> WeightedComplex:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SpecdomError("schema", f"malformed JSON in {path}: {exc}")
    return complex_from_obj(obj)


def write_complex(cx: WeightedComplex, path):
    with open(path, "w") as fh:
        json.dump(complex_to_obj(cx), fh, indent=2)
        fh.write("\n")
