"""Fundamental domains in covers and the Neumann eigenvalue they carry.

A fundamental domain is a connected induced subgraph of a derived cover
containing exactly one lift of every base vertex.  Edges cut by the
domain boundary are simply absent from the induced subcomplex, which is
the natural (Neumann) condition there, while lifts of pinned base
vertices stay pinned.  The bottom Neumann eigenvalue of any such domain
sits below the bottom of the base spectrum (pull any domain test
function back to a deck-periodic one), and the interest is in how close
a good domain can push it.

Construction follows the ascent geometry of a seed function on the base:
lift the largest ascent basin along its steepest-ascent tree, then
attach remaining basins across ridge edges, smallest basin root first,
lexicographically smallest ridge first.  A local search then hill-climbs
over single-vertex relifts.

Lift admissibility: a lift of a free base vertex must not sit on the
truncation rim (the rim is pinned, and pinning a free vertex would let
the domain eigenvalue spill above the base one); lifts of pinned base
vertices may sit anywhere in the fiber.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .complexes import SpecdomError, WeightedComplex, assemble_laplacian
from .covering import Cover, CoverSpec, derive_cover
from .morse import ascend_basins
from .spectral import lowest_eigenpairs

# minimum eigenvalue gain for a search move to be accepted
IMPROVE_TOL = 1e-12


@dataclass(frozen=True)
class FundamentalDomain:
    """One lift per base vertex, with the spectra and defects attached.

    ``selection`` pairs (base_id, cover_id) sorted by base id,
    ``cut_edges`` the cover edges with exactly one endpoint inside,
    ``lambda0`` the bottom Neumann eigenvalue of the induced subcomplex,
    ``defect`` the relative flux imbalance of the lifted base ground
    state at each boundary vertex of the domain.
    """

    selection: tuple[tuple[int, int], ...]
    cut_edges: tuple[tuple[int, int], ...]
    lambda0: float
    defect: dict[int, float]
    max_defect: float

    def cover_ids(self) -> list[int]:
        return [c for _, c in self.selection]

    def to_obj(self) -> dict:
        return {
            "selection": [[b, c] for b, c in self.selection],
            "cut_edges": [[u, v] for u, v in self.cut_edges],
            "lambda0": self.lambda0,
            "max_defect": self.max_defect,
        }


def write_domain(domain: FundamentalDomain, path, envelope=None):
    obj = domain.to_obj()
    if envelope:
        obj = {**envelope, **obj}
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


# -- induced subcomplex ---------------------------------------------------

def _subcomplex(cover: Cover, ids) -> tuple[WeightedComplex, dict[int, int]]:
    ids = sorted(ids)
    remap = {c: i for i, c in enumerate(ids)}
    cx = cover.complex
    vertices = [(remap[c], cx.vertices[c][1], cx.vertices[c][2]) for c in ids]
    edges = [
        (remap[u], remap[v], c)
        for u, v, c in cx.edges
        if u in remap and v in remap
    ]
    return WeightedComplex(vertices, edges), remap


def _check_selection(cover: Cover, ids) -> list[int]:
    ids = list(ids)
    n = cover.base.n
    if len(ids) != n:
        raise SpecdomError(
            "invariant", f"selection has {len(ids)} vertices for base size {n}"
        )
    seen_base = set()
    for c in ids:
        if not (0 <= c < cover.complex.n):
            raise SpecdomError("invariant", f"cover vertex {c} does not exist")
        b = cover.projection[c]
        if b in seen_base:
            raise SpecdomError("invariant", f"base vertex {b} selected twice")
        seen_base.add(b)
        # a free base vertex must not inherit the truncation rim's pin,
        # or the domain eigenvalue may spill above the base one
        if (
            cover.complex.vertices[c][2] == "dirichlet"
            and cover.base.vertices[b][2] != "dirichlet"
        ):
            raise SpecdomError(
                "truncation", f"free base vertex {b} selected on the pinned rim"
            )
    id_set = set(ids)
    adj = {c: [] for c in ids}
    for u, v, w in cover.complex.edges:
        if w > 0.0 and u != v and u in id_set and v in id_set:
            adj[u].append(v)
            adj[v].append(u)
    seen = {ids[0]}
    stack = [ids[0]]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if len(seen) != len(ids):
        missing = sorted(cover.projection[c] for c in id_set - seen)
        raise SpecdomError(
            "disconnected", f"selection is disconnected at base vertices {missing}"
        )
    return ids


def lambda0_of_domain(domain, cover: Cover) -> float:
    """Bottom Neumann eigenvalue of a domain's induced subcomplex."""
    ids = domain.cover_ids() if isinstance(domain, FundamentalDomain) else domain
    sub, _ = _subcomplex(cover, _check_selection(cover, ids))
    return lowest_eigenpairs(assemble_laplacian(sub), 1).eigenvalues[0]


def _cut_edges(cover: Cover, id_set) -> tuple[tuple[int, int], ...]:
    out = []
    for u, v, _ in cover.complex.edges:
        if (u in id_set) != (v in id_set):
            out.append((min(u, v), max(u, v)))
    return tuple(sorted(out))


def _base_ground_state(cover: Cover) -> np.ndarray:
    op = assemble_laplacian(cover.base)
    phi = lowest_eigenpairs(op, 1).vectors[:, 0]
    full = np.zeros(cover.base.n)
    full[op.free] = phi
    return full


def _defects(cover: Cover, id_set, phi_base_full: np.ndarray):
    """Relative flux imbalance of the lifted ground state across the cuts.

    At a free boundary vertex v the quantity is
    |sum over cut edges at v of c (phi(v) - phi(w))| / (mu(v) phi(v));
    at a pinned boundary vertex it is zero by convention (the equation
    there is not part of the operator).
    """
    phi = phi_base_full[np.array(cover.projection)]
    flux: dict[int, float] = {}
    for u, v, c in cover.complex.edges:
        u_in, v_in = u in id_set, v in id_set
        if u_in == v_in:
            continue
        inside, outside = (u, v) if u_in else (v, u)
        flux[inside] = flux.get(inside, 0.0) + c * (phi[inside] - phi[outside])
    defect = {}
    cx = cover.complex
    for v, fl in flux.items():
        if cx.vertices[v][2] == "dirichlet" or phi[v] == 0.0:
            defect[v] = 0.0
        else:
            defect[v] = abs(fl) / (cx.vertices[v][1] * phi[v])
    return defect


def _finalize(cover: Cover, ids, phi_base_full) -> FundamentalDomain:
    ids = _check_selection(cover, ids)
    id_set = set(ids)
    lam0 = lambda0_of_domain(ids, cover)
    cuts = _cut_edges(cover, id_set)
    defect = _defects(cover, id_set, phi_base_full)
    selection = tuple(sorted((cover.projection[c], c) for c in ids))
    return FundamentalDomain(
        selection=selection,
        cut_edges=cuts,
        lambda0=lam0,
        defect=defect,
        max_defect=max(defect.values(), default=0.0),
    )


# -- lift admissibility ---------------------------------------------------

def _allowed_lifts(cover: Cover, base_id: int) -> list[int]:
    """Fiber of a base vertex minus rim lifts when the base vertex is free."""
    base_free = cover.base.vertices[base_id][2] != "dirichlet"
    out = []
    for e_idx in range(len(cover.elements)):
        cid = e_idx * cover.base.n + base_id
        if base_free and cover.complex.vertices[cid][2] == "dirichlet":
            continue
        out.append(cid)
    return out


def _find_base_edge(cover: Cover, a: int, b: int):
    """First base edge joining a and b, with its orientation flag."""
    for (u, v, _), s in zip(cover.base.edges, cover.voltage.sigma):
        if (u, v) == (a, b):
            return s, False
        if (u, v) == (b, a):
            return s, True
    raise SpecdomError("invariant", f"no base edge between {a} and {b}")


def _lift_across(cover: Cover, known_base: int, known_elem, new_base: int):
    """Deck element of the lift of new_base attached to known_base's lift
    across the first base edge joining them."""
    group = cover.voltage.group
    s, reversed_ = _find_base_edge(cover, known_base, new_base)
    # edge (known, new) voltage s lifts (known, g)-(new, g s);
    # edge (new, known) voltage s lifts (new, h)-(known, h s), h = g s^-1
    return group.mul(known_elem, s if not reversed_ else group.inv(s))


def _admissible(cover: Cover, base_id: int, elem) -> int:
    cid = cover.fiber.get((base_id, elem))
    if cid is None:
        raise SpecdomError(
            "truncation",
            f"lift of base vertex {base_id} falls outside the truncation ball",
        )
    base_free = cover.base.vertices[base_id][2] != "dirichlet"
    if base_free and cover.complex.vertices[cid][2] == "dirichlet":
        raise SpecdomError(
            "truncation",
            f"lift of free base vertex {base_id} lands on the pinned rim",
        )
    return cid


# -- construction ---------------------------------------------------------

def build_fundamental_domain(cover: Cover | CoverSpec, f_base=None) -> FundamentalDomain:
    """Basin-by-basin lift of the base guided by a seed function.

    Accepts a derived cover or a recipe for one.  The seed defaults to
    the base ground state (zero at pinned vertices).  The largest ascent
    basin is lifted first, rooted at the identity element, each member
    placed by walking the steepest-ascent tree.  Remaining basins attach
    across ridge edges, smallest basin root first, across the
    lexicographically smallest ridge available.
    """
    if isinstance(cover, CoverSpec):
        cover = derive_cover(cover)
    base = cover.base
    phi_full = _base_ground_state(cover)
    f = phi_full if f_base is None else np.asarray(f_base, dtype=float)
    if f.shape != (base.n,):
        raise SpecdomError("invariant", f"expected base vector of length {base.n}")
    dec = ascend_basins(base, f)
    group = cover.voltage.group

    children: dict[int, list[int]] = {v: [] for v in range(base.n)}
    for v, p in dec.parent.items():
        if p is not None:
            children[p].append(v)

    def lift_basin(root: int, anchor_base: int, anchor_elem) -> dict[int, object]:
        """Deck elements for every member of a basin, propagated from one
        anchored member along the ascent tree."""
        members = set(dec.members(root))
        elems = {anchor_base: anchor_elem}
        stack = [anchor_base]
        while stack:
            x = stack.pop()
            tree_nbrs = [w for w in children[x] if w in members]
            p = dec.parent[x]
            if p is not None and p in members:
                tree_nbrs.append(p)
            for w in tree_nbrs:
                if w not in elems:
                    elems[w] = _lift_across(cover, x, elems[x], w)
                    stack.append(w)
        if set(elems) != members:
            raise SpecdomError(
                "invariant", f"ascent tree of basin {root} is not connected"
            )
        return elems

    sizes = {r: len(dec.members(r)) for r in dec.roots}
    primary = min(dec.roots, key=lambda r: (-sizes[r], r))
    elems = lift_basin(primary, primary, group.identity())
    covered_basins = {primary}

    while len(covered_basins) < len(dec.roots):
        candidates = []
        for a, b in dec.ridges:
            ra, rb = dec.basin[a], dec.basin[b]
            if (ra in covered_basins) != (rb in covered_basins):
                new_root = rb if ra in covered_basins else ra
                candidates.append((new_root, (a, b)))
        if not candidates:
            raise SpecdomError(
                "invariant", "remaining basins share no ridge with the lifted part"
            )
        new_root = min(r for r, _ in candidates)
        ridge = min(e for r, e in candidates if r == new_root)
        a, b = ridge
        known, new = (a, b) if dec.basin[b] == new_root else (b, a)
        anchor_elem = _lift_across(cover, known, elems[known], new)
        elems.update(lift_basin(new_root, new, anchor_elem))
        covered_basins.add(new_root)

    ids = [_admissible(cover, v, g) for v, g in sorted(elems.items())]
    return _finalize(cover, ids, phi_full)


def random_fundamental_domain(cover: Cover, rng, max_retries: int = 200) -> FundamentalDomain:
    """Uniform-ish random domain grown edge by edge (random Prim).

    Starts at a random admissible lift of a random free base vertex and
    repeatedly picks a uniform random cover edge from the current
    selection to an admissible lift of an unselected base vertex.
    Retries on dead ends and on selections whose free part comes out
    disconnected.
    """
    base = cover.base
    phi_full = _base_ground_state(cover)
    free_base = [v for v in range(base.n) if base.vertices[v][2] != "dirichlet"]
    cx = cover.complex

    incident: dict[int, list[tuple[int, int]]] = {}
    for u, v, _ in cx.edges:
        if u == v:
            continue
        incident.setdefault(u, []).append((u, v))
        incident.setdefault(v, []).append((v, u))

    for _ in range(max_retries):
        v0 = free_base[int(rng.integers(len(free_base)))]
        lifts = _allowed_lifts(cover, v0)
        chosen = {v0: lifts[int(rng.integers(len(lifts)))]}
        ok = True
        while len(chosen) < base.n:
            frontier = []
            chosen_ids = set(chosen.values())
            for cid in chosen_ids:
                for a, b in incident.get(cid, ()):
                    pb = cover.projection[b]
                    if pb in chosen:
                        continue
                    base_free = base.vertices[pb][2] != "dirichlet"
                    if base_free and cx.vertices[b][2] == "dirichlet":
                        continue
                    frontier.append((a, b))
            if not frontier:
                ok = False
                break
            a, b = frontier[int(rng.integers(len(frontier)))]
            chosen[cover.projection[b]] = b
        if not ok:
            continue
        try:
            return _finalize(cover, list(chosen.values()), phi_full)
        except SpecdomError as exc:
            if exc.code == "disconnected":
                continue
            raise
    raise SpecdomError(
        "truncation", f"no admissible random domain found in {max_retries} attempts"
    )


def improve_domain(
    domain: FundamentalDomain,
    cover: Cover,
    budget: int = 500,
    return_history: bool = False,
):
    """Steepest-ascent hill climb over single-vertex relifts.

    Every round evaluates all admissible alternative lifts of every base
    vertex (each evaluation counts against ``budget``) and accepts the
    best strict improvement.  Stops when no move improves, or when the
    budget is exhausted.
    """
    phi_full = _base_ground_state(cover)
    current = {cover.projection[c]: c for c in domain.cover_ids()}
    best_val = domain.lambda0
    history = [best_val]
    remaining = int(budget)

    while remaining > 0:
        best_move = None
        best_move_val = best_val
        for b in sorted(current):
            for cid in _allowed_lifts(cover, b):
                if cid == current[b]:
                    continue
                if remaining <= 0:
                    break
                remaining -= 1
                trial = dict(current)
                trial[b] = cid
                try:
                    val = lambda0_of_domain(list(trial.values()), cover)
                except SpecdomError as exc:
                    if exc.code == "disconnected":
                        continue
                    raise
                if val > best_move_val + IMPROVE_TOL:
                    best_move_val = val
                    best_move = (b, cid)
            if remaining <= 0:
                break
        if best_move is None:
            break
        current[best_move[0]] = best_move[1]
        best_val = best_move_val
        history.append(best_val)

    out = _finalize(cover, list(current.values()), phi_full)
    if return_history:
        return out, tuple(history)
    return out


def superlevel_check(cx: WeightedComplex, f, a: float) -> tuple[int, ...]:
    """Vertices where a positive function is at least the threshold."""
    f = np.asarray(f, dtype=float)
    if f.shape != (cx.n,):
        raise SpecdomError("invariant", f"expected vector of length {cx.n}")
    if np.any(f <= 0.0):
        raise SpecdomError("positivity", "superlevel sets need a positive function")
    return tuple(int(v) for v in range(cx.n) if f[v] >= a)
