"""Ready-made complexes and voltage assignments used in tests and docs.

Closed-form anchors: the two-free-vertex pinned path has bottom
eigenvalue (3 - sqrt 5)/2, the free path on n vertices has eigenvalues
2 (1 - cos(pi k / n)) under unit data, and the equilateral double
triangle carries cotangent weight 1/sqrt(3) on each edge with lumped
measure sqrt(3)/6 at each vertex.
"""

from __future__ import annotations

import argparse
import math
import os

import numpy as np

from .complexes import WeightedComplex, write_complex
from .covering import DeckGroup, VoltageAssignment, write_voltage


def path_graph(n: int, dirichlet=(), conductance=1.0, measure=1.0) -> WeightedComplex:
    pins = set(dirichlet)
    vertices = [
        (i, measure, "dirichlet" if i in pins else "interior") for i in range(n)
    ]
    edges = [(i, i + 1, conductance) for i in range(n - 1)]
    return WeightedComplex(vertices, edges)


def cycle_graph(n: int, conductance=1.0, measure=1.0) -> WeightedComplex:
    vertices = [(i, measure, "interior") for i in range(n)]
    edges = [(i, (i + 1) % n, conductance) for i in range(n)]
    return WeightedComplex(vertices, edges)


def p3_mixed() -> WeightedComplex:
    """Two free vertices feeding one absorbing end, lambda0 = (3 - sqrt 5)/2."""
    return path_graph(3, dirichlet=(2,))


def p5_neumann() -> WeightedComplex:
    return path_graph(5)


def p5_mixed() -> WeightedComplex:
    return path_graph(5, dirichlet=(4,))


def c6_mixed() -> WeightedComplex:
    """Six-cycle with one heavy vertex and one weakly absorbing pendant.

    The heavy measure at vertex 2 breaks the rotational symmetry, so the
    quality of a fundamental domain in the pendant's cyclic cover
    genuinely depends on where the cut lands.  The pendant conductance
    is kept small: the ground state then stays nearly flat across the
    valley at vertex 0, which is where the ascent-guided construction
    cuts, and the six possible cut positions give distinct eigenvalues
    rising monotonically toward the cut at the heavy vertex.
    """
    vertices = [
        (0, 1.0, "interior"),
        (1, 1.0, "interior"),
        (2, 2.5, "interior"),
        (3, 1.0, "interior"),
        (4, 1.0, "interior"),
        (5, 1.0, "interior"),
        (6, 1.0, "dirichlet"),
    ]
    edges = [
        (0, 1, 1.0),
        (1, 2, 1.0),
        (2, 3, 1.0),
        (3, 4, 1.0),
        (4, 5, 1.0),
        (5, 0, 1.0),
        (0, 6, 0.05),
    ]
    return WeightedComplex(vertices, edges)


def c6_mixed_voltage() -> VoltageAssignment:
    """Unwind the six-cycle of :func:`c6_mixed` along the (5, 0) edge."""
    group = DeckGroup(kind="free_abelian", rank=1)
    sigma = [[0], [0], [0], [0], [0], [1], [0]]
    return VoltageAssignment(group, sigma)


def sym_tie() -> WeightedComplex:
    """Six-cycle with absorbing pendants at two adjacent vertices.

    The reflection swapping vertices 0 and 1 forces an exact value tie
    of the ground state across the (3, 4) edge, the edge the voltage
    below unwinds.
    """
    vertices = [(i, 1.0, "interior") for i in range(6)]
    vertices += [(6, 1.0, "dirichlet"), (7, 1.0, "dirichlet")]
    edges = [(i, (i + 1) % 6, 1.0) for i in range(6)]
    edges += [(0, 6, 1.0), (1, 7, 1.0)]
    return WeightedComplex(vertices, edges)


def sym_tie_voltage() -> VoltageAssignment:
    group = DeckGroup(kind="free_abelian", rank=1)
    sigma = [[0]] * 8
    sigma[3] = [1]  # edge (3, 4)
    return VoltageAssignment(group, sigma)


def c4_pin_z2() -> WeightedComplex:
    vertices = [(i, 1.0, "interior") for i in range(4)] + [(4, 1.0, "dirichlet")]
    edges = [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0), (0, 4, 1.0)]
    return WeightedComplex(vertices, edges)


def c4_pin_z2_voltage() -> VoltageAssignment:
    group = DeckGroup(kind="free_abelian", rank=2)
    sigma = [[1, 0], [0, 0], [0, 1], [0, 0], [0, 0]]
    return VoltageAssignment(group, sigma)


def c3_pin_z3() -> WeightedComplex:
    vertices = [(i, 1.0, "interior") for i in range(3)] + [(3, 1.0, "dirichlet")]
    edges = [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0), (0, 3, 1.0)]
    return WeightedComplex(vertices, edges)


def c3_pin_z3_voltage() -> VoltageAssignment:
    """Cyclic three-fold cover via the permutation (0 1 2)."""
    group = DeckGroup(kind="finite", generators=((1, 2, 0),))
    identity = [0, 1, 2]
    sigma = [identity, identity, [1, 2, 0], identity]
    return VoltageAssignment(group, sigma)


def z_line() -> tuple[WeightedComplex, VoltageAssignment]:
    """One free vertex with a loop, unwinding to the integer line."""
    cx = WeightedComplex([(0, 1.0, "interior")], [(0, 0, 1.0)])
    group = DeckGroup(kind="free_abelian", rank=1)
    return cx, VoltageAssignment(group, [[1]])


def wedge_f2() -> tuple[WeightedComplex, VoltageAssignment]:
    """One free vertex with two loops, unwinding to the 4-regular tree."""
    cx = WeightedComplex([(0, 1.0, "interior")], [(0, 0, 1.0), (0, 0, 1.0)])
    group = DeckGroup(kind="free", rank=2)
    return cx, VoltageAssignment(group, ["a", "b"])


def c3_z() -> tuple[WeightedComplex, VoltageAssignment]:
    """Three-cycle unwound to a line of triangles, for phase sweeps."""
    cx = cycle_graph(3)
    group = DeckGroup(kind="free_abelian", rank=1)
    return cx, VoltageAssignment(group, [[0], [0], [1]])


def double_triangle() -> WeightedComplex:
    """Two equilateral faces glued along all three edges (a pillow)."""
    vertices = [(i, 1.0, "interior") for i in range(3)]
    edges = [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]
    triangles = [(0, 1, 2), (0, 1, 2)]
    lengths = {(0, 1): 1.0, (1, 2): 1.0, (0, 2): 1.0}
    return WeightedComplex(vertices, edges, triangles, lengths)


def octahedron() -> WeightedComplex:
    """Regular octahedron, vertices on the coordinate axes."""
    vertices = [(i, 1.0, "interior") for i in range(6)]
    pairs = [
        (0, 2), (0, 3), (0, 4), (0, 5),
        (1, 2), (1, 3), (1, 4), (1, 5),
        (2, 4), (2, 5), (3, 4), (3, 5),
    ]
    edges = [(u, v, 1.0) for u, v in pairs]
    triangles = [
        (0, 2, 4), (2, 1, 4), (1, 3, 4), (3, 0, 4),
        (2, 0, 5), (1, 2, 5), (3, 1, 5), (0, 3, 5),
    ]
    lengths = {p: math.sqrt(2.0) for p in pairs}
    return WeightedComplex(vertices, edges, triangles, lengths)


def octahedron_height() -> np.ndarray:
    coords = np.array(
        [
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
        ]
    )
    return coords @ np.array([0.23, 0.57, 0.79])


def torus_grid(m: int = 4) -> WeightedComplex:
    """m x m square torus, squares split along one diagonal.

    The right-angle corners give the diagonal edges zero cotangent
    weight, so this is also the zero-coupling edge case: the assembled
    operator is the five-point stencil.
    """
    def vid(i, j):
        return (i % m) * m + (j % m)

    vertices = [(v, 1.0, "interior") for v in range(m * m)]
    pairs = set()
    triangles = []
    lengths = {}
    for i in range(m):
        for j in range(m):
            a = vid(i, j)
            r = vid(i, j + 1)
            d = vid(i + 1, j)
            dg = vid(i + 1, j + 1)
            triangles.append((a, r, dg))
            triangles.append((a, dg, d))
            for (x, y), l in (
                ((a, r), 1.0),
                ((a, d), 1.0),
                ((a, dg), math.sqrt(2.0)),
            ):
                p = (min(x, y), max(x, y))
                pairs.add(p)
                lengths[p] = l
    edges = [(u, v, 1.0) for u, v in sorted(pairs)]
    return WeightedComplex(vertices, edges, triangles, lengths)


def random_complex(rng, n_free: int = 8, extra_edges: int = 3, pins: int = 1) -> WeightedComplex:
    """Random connected graph: a tree plus chords, with pendant pins.

    Pins attach as leaves so the free subgraph always stays connected.
    Conductances and measures are drawn from [0.5, 2].
    """
    vertices = [
        (i, float(rng.uniform(0.5, 2.0)), "interior") for i in range(n_free)
    ]
    edges = []
    present = set()
    for v in range(1, n_free):
        u = int(rng.integers(v))
        edges.append((u, v, float(rng.uniform(0.5, 2.0))))
        present.add((u, v))
    for _ in range(extra_edges):
        u, v = sorted(rng.choice(n_free, size=2, replace=False).tolist())
        if (u, v) not in present:
            present.add((u, v))
            edges.append((u, v, float(rng.uniform(0.5, 2.0))))
    for p in range(pins):
        pid = n_free + p
        anchor = int(rng.integers(n_free))
        vertices.append((pid, float(rng.uniform(0.5, 2.0)), "dirichlet"))
        edges.append((anchor, pid, float(rng.uniform(0.5, 2.0))))
    return WeightedComplex(vertices, edges)


NAMED = {
    "p3_mixed": p3_mixed,
    "p5_neumann": p5_neumann,
    "p5_mixed": p5_mixed,
    "c6_mixed": c6_mixed,
    "sym_tie": sym_tie,
    "c4_pin_z2": c4_pin_z2,
    "c3_pin_z3": c3_pin_z3,
    "double_triangle": double_triangle,
    "octahedron": octahedron,
    "torus_grid": torus_grid,
}

NAMED_VOLTAGES = {
    "c6_mixed": c6_mixed_voltage,
    "sym_tie": sym_tie_voltage,
    "c4_pin_z2": c4_pin_z2_voltage,
    "c3_pin_z3": c3_pin_z3_voltage,
}


def write_fixture_files(outdir: str):
    os.makedirs(outdir, exist_ok=True)
    written = []
    for name, make in NAMED.items():
        path = os.path.join(outdir, f"{name}.json")
        write_complex(make(), path)
        written.append(path)
    for name, make in NAMED_VOLTAGES.items():
        path = os.path.join(outdir, f"{name}_voltage.json")
        write_voltage(make(), NAMED[name](), path)
        written.append(path)
    for name, make in (("z_line", z_line), ("wedge_f2", wedge_f2), ("c3_z", c3_z)):
        cx, va = make()
        cpath = os.path.join(outdir, f"{name}.json")
        vpath = os.path.join(outdir, f"{name}_voltage.json")
        write_complex(cx, cpath)
        write_voltage(va, cx, vpath)
        written.extend([cpath, vpath])
    return written


def main(argv=None):
    parser = argparse.ArgumentParser(description="write the named fixtures as JSON")
    parser.add_argument("outdir")
    args = parser.parse_args(argv)
    for path in write_fixture_files(args.outdir):
        print(path)


if __name__ == "__main__":
    main()
