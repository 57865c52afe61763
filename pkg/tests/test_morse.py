"""Critical point classification and steepest-ascent basins."""

import numpy as np
import pytest

from specdom.complexes import SpecdomError, WeightedComplex
from specdom.covering import CoverSpec, derive_cover, lift_function
from specdom.fixtures import (
    c3_pin_z3,
    c3_pin_z3_voltage,
    cycle_graph,
    octahedron,
    octahedron_height,
    path_graph,
    random_complex,
    torus_grid,
)
from specdom.morse import ascend_basins, classify_critical


# -- classification on graphs -------------------------------------------------

def test_three_path_tent_profile():
    rep = classify_critical(path_graph(3), [0.0, 1.0, 0.0])
    assert rep.classification == {0: "local_min", 1: "local_max", 2: "local_min"}
    assert rep.tie_edges == ()
    assert not rep.surface_mode
    assert all(v is None for v in rep.index.values())


def test_monotone_path_has_one_max_one_min():
    rep = classify_critical(path_graph(5), [0.0, 1.0, 2.0, 3.0, 4.0])
    assert rep.count("local_max") == 1
    assert rep.count("local_min") == 1
    assert rep.count("regular") == 3


def test_constant_function_is_totally_degenerate():
    cx = cycle_graph(4)
    rep = classify_critical(cx, np.ones(4))
    assert all(lab == "degenerate" for lab in rep.classification.values())
    assert len(rep.tie_edges) == 4
    assert rep.index_sum() == 0


def test_tie_detection_uses_exact_equality():
    rep = classify_critical(path_graph(3), [0.5, 0.5 + 1e-15, 1.0])
    assert rep.tie_edges == ()


# -- classification on surfaces -------------------------------------------------

def test_octahedron_height_index_sum_is_two():
    rep = classify_critical(octahedron(), octahedron_height())
    assert rep.surface_mode
    assert rep.tie_edges == ()
    assert rep.index_sum() == 2


def test_torus_random_function_index_sum_is_zero():
    cx = torus_grid(4)
    rng = np.random.default_rng(11)
    f = rng.standard_normal(cx.n)
    rep = classify_critical(cx, f)
    assert rep.surface_mode
    assert rep.tie_edges == ()
    assert rep.index_sum() == 0
    assert rep.count("local_max") == 3
    assert rep.count("local_min") == 3
    assert rep.count("saddle") == 6


def test_saddles_carry_negative_index_on_surfaces():
    cx = torus_grid(4)
    rng = np.random.default_rng(11)
    rep = classify_critical(cx, rng.standard_normal(cx.n))
    for v, lab in rep.classification.items():
        if lab == "saddle":
            assert rep.index[v] <= 0
        elif lab in ("local_max", "local_min"):
            assert rep.index[v] == 1
        elif lab == "regular":
            assert rep.index[v] == 0


# -- basins ----------------------------------------------------------------------

def test_five_path_basins():
    dec = ascend_basins(path_graph(5), [5.0, 1.0, 3.0, 2.0, 4.0])
    assert dec.roots == (0, 2, 4)
    assert dec.members(0) == [0, 1]
    assert dec.members(2) == [2]
    assert dec.members(4) == [3, 4]
    assert dec.parent[1] == 0
    assert dec.parent[3] == 4
    assert dec.ridges == ((1, 2), (2, 3))


def test_value_tie_rejected_with_the_edge_named():
    with pytest.raises(SpecdomError) as exc:
        ascend_basins(cycle_graph(4), [1.0, 1.0, 2.0, 3.0])
    assert exc.value.code == "tie"
    assert "(0,1)" in str(exc.value)


def test_equal_steepest_neighbours_rejected():
    verts = [(i, 1.0, "interior") for i in range(3)]
    star = WeightedComplex(verts, [(0, 1, 1.0), (0, 2, 1.0)])
    with pytest.raises(SpecdomError) as exc:
        ascend_basins(star, [0.0, 2.0, 2.0])
    assert exc.value.code == "tie"


def test_basin_count_equals_local_maximum_count():
    rng = np.random.default_rng(2)
    for _ in range(10):
        cx = random_complex(rng)
        f = rng.standard_normal(cx.n)
        rep = classify_critical(cx, f)
        if rep.tie_edges:
            continue
        dec = ascend_basins(cx, f)
        assert len(dec.roots) == rep.count("local_max")
        assert set(dec.basin) == set(range(cx.n))


def test_every_vertex_reaches_a_root_by_ascent():
    rng = np.random.default_rng(3)
    cx = random_complex(rng)
    f = rng.standard_normal(cx.n)
    dec = ascend_basins(cx, f)
    for v in range(cx.n):
        r = dec.basin[v]
        assert r in dec.roots
        assert f[r] >= f[v]


def test_basins_are_deck_equivariant_on_closed_covers():
    base = c3_pin_z3()
    cover = derive_cover(CoverSpec(base, c3_pin_z3_voltage(), radius=1))
    f = lift_function(cover, np.array([3.0, 2.0, 1.0, 0.0]))
    dec = ascend_basins(cover.complex, f)
    gamma = (1, 2, 0)
    for cid in range(cover.complex.n):
        img = cover.deck_action(gamma, cid)
        assert dec.basin[img] == cover.deck_action(gamma, dec.basin[cid])
