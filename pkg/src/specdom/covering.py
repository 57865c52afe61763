"""Deck groups, voltage assignments, derived covers and twisted spectra.

A voltage assignment labels each oriented base edge with a group element;
the derived cover has vertex set (base vertex, group element) and an edge
from (u, g) to (v, g * sigma) over each base edge (u, v) with voltage
sigma.  Infinite groups are truncated to a ball in the word metric, and
the truncation rim is pinned (Dirichlet) unless the ball happens to be
closed under all voltage multiplications, in which case the cover is
complete and has no rim.

Three group kinds are supported: ``free_abelian`` (elements are integer
vectors, L1 word metric), ``free`` (reduced words over a..z/A..Z, length
metric), and ``finite`` (permutations in one-line form, metric by
breadth-first distance from the identity over the declared generators).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .complexes import (
    SpecdomError,
    WeightedComplex,
    effective_graph_with_map,
)

_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def _reduce_word(word: str) -> str:
    out = []
    for ch in word:
        if out and out[-1] != ch and out[-1] == ch.swapcase():
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


@dataclass(frozen=True)
class DeckGroup:
    """Group acting on fibers, one of three kinds.

    free_abelian: ``rank`` integers per element.
    free: reduced words, generators a, b, ... with inverses A, B, ...
    finite: permutation group generated by ``generators`` (one-line form).
    """

    kind: str
    rank: int = 0
    generators: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        if self.kind in ("free_abelian", "free"):
            if self.rank < 1:
                raise SpecdomError("schema", f"{self.kind} group needs rank >= 1")
            if self.kind == "free" and self.rank > 26:
                raise SpecdomError("schema", "free rank limited to 26 letters")
        elif self.kind == "finite":
            if not self.generators:
                raise SpecdomError("schema", "finite group needs generators")
            m = len(self.generators[0])
            for g in self.generators:
                if len(g) != m or sorted(g) != list(range(m)):
                    raise SpecdomError(
                        "schema", f"generator {g} is not a permutation of 0..{m - 1}"
                    )
        else:
            raise SpecdomError("schema", f"unknown group kind {self.kind!r}")

    # -- element algebra --------------------------------------------

    def identity(self):
        if self.kind == "free_abelian":
            return (0,) * self.rank
        if self.kind == "free":
            return ""
        return tuple(range(len(self.generators[0])))

    def mul(self, g, h):
        if self.kind == "free_abelian":
            return tuple(a + b for a, b in zip(g, h))
        if self.kind == "free":
            return _reduce_word(g + h)
        return tuple(g[h[i]] for i in range(len(h)))

    def inv(self, g):
        if self.kind == "free_abelian":
            return tuple(-a for a in g)
        if self.kind == "free":
            return g[::-1].swapcase()
        out = [0] * len(g)
        for i, gi in enumerate(g):
            out[gi] = i
        return tuple(out)

    def norm(self, g) -> int:
        if self.kind == "free_abelian":
            return int(sum(abs(a) for a in g))
        if self.kind == "free":
            return len(g)
        return self._finite_dist()[g]

    def _step_set(self):
        """Right-multiplication steps of word length one."""
        if self.kind == "free_abelian":
            steps = []
            for i in range(self.rank):
                e = [0] * self.rank
                e[i] = 1
                steps.append(tuple(e))
                e2 = [0] * self.rank
                e2[i] = -1
                steps.append(tuple(e2))
            return steps
        if self.kind == "free":
            return [_LETTERS[i] for i in range(self.rank)] + [
                _LETTERS[i].upper() for i in range(self.rank)
            ]
        gens = list(dict.fromkeys(self.generators))
        return gens + [self.inv(g) for g in gens if self.inv(g) not in gens]

    def _finite_dist(self):
        cache = getattr(self, "_dist_cache", None)
        if cache is not None:
            return cache
        dist = {self.identity(): 0}
        frontier = [self.identity()]
        steps = self._step_set()
        while frontier:
            nxt = []
            for g in frontier:
                for s in steps:
                    h = self.mul(g, s)
                    if h not in dist:
                        dist[h] = dist[g] + 1
                        nxt.append(h)
            frontier = nxt
        object.__setattr__(self, "_dist_cache", dist)
        return dist

    def ball(self, radius: int) -> tuple:
        """Elements of word norm <= radius, deterministically ordered by
        (norm, element)."""
        if radius < 0:
            raise SpecdomError("invariant", f"negative radius {radius}")
        if self.kind == "finite":
            dist = self._finite_dist()
            elems = [g for g, d in dist.items() if d <= radius]
            return tuple(sorted(elems, key=lambda g: (dist[g], g)))
        seen = {self.identity()}
        layers = [[self.identity()]]
        steps = self._step_set()
        for _ in range(radius):
            nxt = []
            for g in layers[-1]:
                for s in steps:
                    h = self.mul(g, s)
                    if h not in seen:
                        seen.add(h)
                        nxt.append(h)
            layers.append(nxt)
        out = []
        for layer in layers:
            out.extend(sorted(layer))
        return tuple(out)

    # -- element serialization ---------------------------------------

    def validate_element(self, obj):
        """Canonical internal form of a JSON word, rejecting malformed input."""
        if self.kind == "free_abelian":
            if (
                not isinstance(obj, (list, tuple))
                or len(obj) != self.rank
                or not all(isinstance(x, int) and not isinstance(x, bool) for x in obj)
            ):
                raise SpecdomError(
                    "schema", f"expected {self.rank} integers, got {obj!r}"
                )
            return tuple(obj)
        if self.kind == "free":
            if not isinstance(obj, str):
                raise SpecdomError("schema", f"expected a word string, got {obj!r}")
            allowed = set(_LETTERS[: self.rank]) | {
                c.upper() for c in _LETTERS[: self.rank]
            }
            for ch in obj:
                if ch not in allowed:
                    raise SpecdomError(
                        "schema", f"letter {ch!r} outside rank-{self.rank} alphabet"
                    )
            return _reduce_word(obj)
        m = len(self.generators[0])
        if (
            not isinstance(obj, (list, tuple))
            or len(obj) != m
            or sorted(obj) != list(range(m))
        ):
            raise SpecdomError("schema", f"expected a permutation of 0..{m - 1}, got {obj!r}")
        g = tuple(obj)
        if g not in self._finite_dist():
            raise SpecdomError(
                "schema", f"permutation {obj!r} not generated by the declared generators"
            )
        return g

    def element_to_obj(self, g):
        if self.kind == "free":
            return g
        return list(g)

    def to_obj(self) -> dict:
        if self.kind == "finite":
            return {"kind": "finite", "generators": [list(g) for g in self.generators]}
        return {"kind": self.kind, "rank": self.rank}


def group_from_obj(obj) -> DeckGroup:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise SpecdomError("schema", "group must be an object with a kind")
    kind = obj["kind"]
    if kind in ("free_abelian", "free"):
        if set(obj) != {"kind", "rank"}:
            raise SpecdomError("schema", f"group fields must be kind, rank: {obj!r}")
        return DeckGroup(kind=kind, rank=obj["rank"])
    if kind == "finite":
        if set(obj) != {"kind", "generators"}:
            raise SpecdomError(
                "schema", f"group fields must be kind, generators: {obj!r}"
            )
        return DeckGroup(kind=kind, generators=tuple(tuple(g) for g in obj["generators"]))
    raise SpecdomError("schema", f"unknown group kind {kind!r}")


@dataclass(frozen=True)
class VoltageAssignment:
    """One group element per base edge, aligned with the edge list."""

    group: DeckGroup
    sigma: tuple

    def __init__(self, group: DeckGroup, sigma):
        object.__setattr__(self, "group", group)
        object.__setattr__(
            self,
            "sigma",
            tuple(group.validate_element(group.element_to_obj(s)) for s in sigma),
        )

    def to_obj(self, base: WeightedComplex) -> dict:
        return {
            "group": self.group.to_obj(),
            "voltages": [
                {"u": u, "v": v, "word": self.group.element_to_obj(s)}
                for (u, v, _), s in zip(base.edges, self.sigma)
            ],
        }


def voltage_from_obj(obj, base: WeightedComplex) -> VoltageAssignment:
    if not isinstance(obj, dict) or set(obj) != {"group", "voltages"}:
        raise SpecdomError("schema", "voltage document needs exactly group, voltages")
    group = group_from_obj(obj["group"])
    rows = obj["voltages"]
    if len(rows) != len(base.edges):
        raise SpecdomError(
            "schema",
            f"{len(rows)} voltage entries for {len(base.edges)} base edges",
        )
    sigma = []
    for i, row in enumerate(rows):
        if not isinstance(row, dict) or set(row) != {"u", "v", "word"}:
            raise SpecdomError("schema", f"voltage entries need u, v, word: {row!r}")
        eu, ev, _ = base.edges[i]
        if (row["u"], row["v"]) != (eu, ev):
            raise SpecdomError(
                "schema",
                f"voltage entry {i} is for edge ({row['u']},{row['v']}) "
                f"but base edge {i} is ({eu},{ev})",
            )
        sigma.append(group.validate_element(row["word"]))
    va = object.__new__(VoltageAssignment)
    object.__setattr__(va, "group", group)
    object.__setattr__(va, "sigma", tuple(sigma))
    return va


def read_voltage(path, base: WeightedComplex) -> VoltageAssignment:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SpecdomError("schema", f"malformed JSON in {path}: {exc}")
    return voltage_from_obj(obj, base)


def write_voltage(va: VoltageAssignment, base: WeightedComplex, path):
    with open(path, "w") as fh:
        json.dump(va.to_obj(base), fh, indent=2)
        fh.write("\n")


@dataclass(frozen=True)
class CoverSpec:
    """Recipe for a (possibly truncated) derived cover."""

    base: WeightedComplex
    voltage: VoltageAssignment
    radius: int

    def __post_init__(self):
        if self.radius < 0:
            raise SpecdomError("invariant", f"negative radius {self.radius}")


@dataclass(frozen=True)
class Cover:
    """Derived cover with its bookkeeping.

    Cover vertex ids are ``e_idx * n_base + base_id`` where ``e_idx``
    indexes :attr:`elements`; this makes ids dense and the layout
    deterministic.  ``closed`` records whether the element ball was
    closed under all voltage multiplications (complete cover, no rim).
    """

    complex: WeightedComplex
    base: WeightedComplex
    voltage: VoltageAssignment
    radius: int
    elements: tuple
    projection: tuple[int, ...]
    fiber: dict
    closed: bool

    def element_of(self, cover_id: int):
        return self.elements[cover_id // self.base.n]

    def deck_action(self, gamma, cover_id: int):
        """Image of a cover vertex under left translation, None if it
        leaves the truncation ball."""
        g = self.element_of(cover_id)
        v = self.projection[cover_id]
        return self.fiber.get((v, self.voltage.group.mul(gamma, g)))


def _voltage_on_effective(base, voltage):
    """Reduce a triangulated base to its weighted graph, keeping the
    voltage aligned with the surviving edges."""
    if base.triangles is None:
        return base, voltage
    eff, kept = effective_graph_with_map(base)
    va = object.__new__(VoltageAssignment)
    object.__setattr__(va, "group", voltage.group)
    object.__setattr__(va, "sigma", tuple(voltage.sigma[i] for i in kept))
    return eff, va


def derive_cover(spec: CoverSpec) -> Cover:
    """Build the derived cover over a ball in the deck group.

    Lifted vertices keep the base measure and tag, except that rim lifts
    (word norm equal to the truncation radius, when the ball is not
    closed) are pinned.  Each base edge with voltage sigma lifts to an
    edge from (u, g) to (v, g * sigma) whenever both ends are in the
    ball; a single pass over (base edge, element) pairs enumerates every
    cover edge exactly once.
    """
    base, voltage = _voltage_on_effective(spec.base, spec.voltage)
    group = voltage.group
    n = base.n
    elements = group.ball(spec.radius)
    elem_set = set(elements)

    distinct = set(voltage.sigma)
    closed = all(group.mul(g, s) in elem_set for g in elements for s in distinct)
    if not closed and spec.radius == 0:
        raise SpecdomError(
            "truncation", "radius 0 with open voltages leaves no interior"
        )

    fiber = {}
    vertices = []
    projection = []
    norms = {g: group.norm(g) for g in elements}
    for e_idx, g in enumerate(elements):
        rim = (not closed) and norms[g] == spec.radius
        for v, (vid, mu, tag) in enumerate(base.vertices):
            cid = e_idx * n + v
            fiber[(v, g)] = cid
            vertices.append((cid, mu, "dirichlet" if (rim or tag == "dirichlet") else tag))
            projection.append(v)

    edges = []
    for e_idx, g in enumerate(elements):
        for (u, v, c), s in zip(base.edges, voltage.sigma):
            target = fiber.get((v, group.mul(g, s)))
            if target is not None:
                edges.append((e_idx * n + u, target, c))

    cover_cx = WeightedComplex(vertices, edges)
    return Cover(
        complex=cover_cx,
        base=base,
        voltage=voltage,
        radius=spec.radius,
        elements=elements,
        projection=tuple(projection),
        fiber=fiber,
        closed=closed,
    )


def lift_function(cover: Cover, f_base: np.ndarray) -> np.ndarray:
    """Pull a base vertex function back through the projection."""
    f_base = np.asarray(f_base, dtype=float)
    if f_base.shape != (cover.base.n,):
        raise SpecdomError("invariant", f"expected base vector of length {cover.base.n}")
    return f_base[np.array(cover.projection)]


# -- twisted (Floquet) spectra for free-abelian covers -------------------

@dataclass(frozen=True)
class FloquetResult:
    lambda_min: float
    theta: tuple[float, ...]
    samples: int


def floquet_bottom(base: WeightedComplex, voltage: VoltageAssignment, theta) -> float:
    """Bottom eigenvalue of the phase-twisted pencil at one phase vector."""
    base, voltage = _voltage_on_effective(base, voltage)
    H, M = _twisted_matrix(base, voltage, np.atleast_1d(np.asarray(theta, dtype=float)))
    return float(sla.eigh(H, np.diag(M), eigvals_only=True)[0])


def _twisted_matrix(base, voltage, theta):
    group = voltage.group
    if group.kind != "free_abelian":
        raise SpecdomError("invariant", "phase twisting needs a free abelian deck group")
    if theta.shape != (group.rank,):
        raise SpecdomError("invariant", f"expected {group.rank} phase components")
    tags = base.tags
    free = base.free_ids()
    index = {v: i for i, v in enumerate(free)}
    nf = len(free)
    if nf == 0:
        raise SpecdomError("disconnected", "no free vertices")
    H = np.zeros((nf, nf), dtype=complex)
    for (u, v, c), s in zip(base.edges, voltage.sigma):
        phase = float(np.dot(theta, s))
        fu, fv = tags[u] != "dirichlet", tags[v] != "dirichlet"
        if u == v:
            if fu:
                H[index[u], index[u]] += 2.0 * c * (1.0 - math.cos(phase))
            continue
        if fu and fv:
            iu, iv = index[u], index[v]
            H[iu, iu] += c
            H[iv, iv] += c
            H[iu, iv] -= c * np.exp(1j * phase)
            H[iv, iu] -= c * np.exp(-1j * phase)
        elif fu:
            H[index[u], index[u]] += c
        elif fv:
            H[index[v], index[v]] += c
    herm = np.max(np.abs(H - H.conj().T))
    if herm > 1e-12 * max(1.0, np.max(np.abs(H))):
        raise SpecdomError("invariant", f"twisted matrix not Hermitian, defect {herm:.3e}")
    return H, base.measures[free]


def _golden_min(fun, a, b, tol):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    return 0.5 * (a + b)


def floquet_lambda0(
    base: WeightedComplex,
    voltage: VoltageAssignment,
    samples: int = 64,
    refine_tol: float = 1e-10,
) -> FloquetResult:
    """Minimum over phases of the twisted bottom eigenvalue.

    Scans a uniform grid (which always contains theta = 0), then runs
    coordinate-wise golden-section refinement in the grid cell around
    the best sample.  The refined phase is kept only when it beats the
    grid sample beyond eigensolve noise; the band bottom is numerically
    flat near its minimum, and wandering inside the flat region would
    otherwise replace an exact grid phase by refinement dither.  The
    reported phase is wrapped to (-pi, pi].
    """
    base_eff, voltage = _voltage_on_effective(base, voltage)
    group = voltage.group
    d = group.rank
    if samples < 2:
        raise SpecdomError("invariant", "need at least 2 samples per dimension")

    def lam(theta):
        H, M = _twisted_matrix(base_eff, voltage, np.asarray(theta, dtype=float))
        return float(sla.eigh(H, np.diag(M), eigvals_only=True)[0])

    h = 2.0 * math.pi / samples
    best_val = math.inf
    best_theta = None
    for idx in np.ndindex(*([samples] * d)):
        theta = np.array(idx, dtype=float) * h
        val = lam(theta)
        if val < best_val - 0.0:
            best_val = val
            best_theta = theta

    theta = best_theta.copy()
    for _ in range(200):
        moved = False
        for c in range(d):
            lo, hi = theta[c] - h, theta[c] + h

            def fun(x, c=c):
                t = theta.copy()
                t[c] = x
                return lam(t)

            new = _golden_min(fun, lo, hi, refine_tol)
            if abs(new - theta[c]) > refine_tol:
                moved = True
            theta[c] = new
        if not moved:
            break
    final = lam(theta)
    if final >= best_val - 1e-12 * (1.0 + abs(best_val)):
        theta, final = best_theta, best_val
    # wrap phases to (-pi, pi]
    wrapped = tuple(
        float(x - 2.0 * math.pi * math.floor((x + math.pi) / (2.0 * math.pi)))
        for x in theta
    )
    return FloquetResult(lambda_min=final, theta=wrapped, samples=samples)


def richardson_extrapolate(pairs) -> float:
    """Limit estimate from the last two (radius, value) pairs, assuming
    value(R) = limit + C / R**2."""
    if len(pairs) < 2:
        raise SpecdomError("invariant", "need at least two radii to extrapolate")
    (r1, v1), (r2, v2) = pairs[-2], pairs[-1]
    if r2 <= r1:
        raise SpecdomError("invariant", "radii must be increasing")
    return (r2 * r2 * v2 - r1 * r1 * v1) / (r2 * r2 - r1 * r1)
