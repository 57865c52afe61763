"""Deck groups, derived covers, phase-twisted spectra, extrapolation."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from specdom.complexes import SpecdomError, assemble_laplacian
from specdom.covering import (
    CoverSpec,
    DeckGroup,
    VoltageAssignment,
    derive_cover,
    floquet_bottom,
    floquet_lambda0,
    lift_function,
    read_voltage,
    richardson_extrapolate,
    voltage_from_obj,
    write_voltage,
)
from specdom.fixtures import (
    c3_pin_z3,
    c3_pin_z3_voltage,
    c3_z,
    c6_mixed,
    c6_mixed_voltage,
    cycle_graph,
    wedge_f2,
    z_line,
)
from specdom.spectral import lowest_eigenpairs


# -- group element algebra ----------------------------------------------------

def test_free_group_words_reduce():
    g = DeckGroup(kind="free", rank=2)
    assert g.mul("a", "A") == ""
    assert g.mul("ab", "BA") == ""
    assert g.mul("ab", "Ba") == "aa"
    assert g.inv("aB") == "bA"
    assert g.norm("abA") == 3
    assert g.identity() == ""


def test_free_abelian_vectors():
    g = DeckGroup(kind="free_abelian", rank=2)
    assert g.mul((1, 2), (3, -2)) == (4, 0)
    assert g.inv((1, -5)) == (-1, 5)
    assert g.norm((2, -3)) == 5
    assert g.identity() == (0, 0)


def test_finite_permutations_compose():
    g = DeckGroup(kind="finite", generators=((1, 2, 0),))
    e = g.identity()
    s = (1, 2, 0)
    assert g.mul(s, g.inv(s)) == e
    assert g.mul(s, s) == (2, 0, 1)
    assert g.norm(e) == 0
    assert g.norm(s) in (1, 2)


def test_group_schema_validation():
    with pytest.raises(SpecdomError):
        DeckGroup(kind="free_abelian", rank=0)
    with pytest.raises(SpecdomError):
        DeckGroup(kind="finite", generators=())
    with pytest.raises(SpecdomError):
        DeckGroup(kind="finite", generators=((0, 0, 1),))
    with pytest.raises(SpecdomError):
        DeckGroup(kind="cyclic")


def test_ball_sizes():
    z = DeckGroup(kind="free_abelian", rank=1)
    assert len(z.ball(3)) == 7
    f2 = DeckGroup(kind="free", rank=2)
    assert len(f2.ball(0)) == 1
    assert len(f2.ball(1)) == 5
    assert len(f2.ball(2)) == 17


# -- derived covers -----------------------------------------------------------

def test_loop_unwinds_to_a_path():
    base, volt = z_line()
    cover = derive_cover(CoverSpec(base, volt, radius=2))
    assert cover.complex.n == 5
    assert len(cover.complex.edges) == 4
    tags = [t for _, _, t in cover.complex.vertices]
    assert tags.count("dirichlet") == 2  # the two rim lifts
    assert not cover.closed


def test_finite_cover_of_pinned_triangle_is_closed():
    cover = derive_cover(CoverSpec(c3_pin_z3(), c3_pin_z3_voltage(), radius=1))
    assert cover.closed
    assert cover.complex.n == 12
    assert len(cover.complex.edges) == 12
    free = [v for v in range(cover.complex.n)
            if cover.complex.vertices[v][2] != "dirichlet"]
    deg = {}
    for u, v, _ in cover.complex.edges:
        deg[u] = deg.get(u, 0) + 1
        deg[v] = deg.get(v, 0) + 1
    # a nine-cycle with three pendant pins hanging off it
    assert sorted(deg[v] for v in free) == [2, 2, 2, 2, 2, 2, 3, 3, 3]


def test_trivial_voltages_give_disjoint_copies():
    base = c3_pin_z3()
    group = DeckGroup(kind="finite", generators=((1, 2, 0),))
    ident = [0, 1, 2]
    volt = VoltageAssignment(group, [ident] * len(base.edges))
    cover = derive_cover(CoverSpec(base, volt, radius=1))
    assert cover.closed
    # count connected components of the cover graph
    parent = list(range(cover.complex.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v, _ in cover.complex.edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
    comps = {find(v) for v in range(cover.complex.n)}
    assert len(comps) == len(cover.elements)


def test_cover_vertices_inherit_measures_and_tags():
    cover = derive_cover(CoverSpec(c6_mixed(), c6_mixed_voltage(), radius=2))
    for cid in range(cover.complex.n):
        b = cover.projection[cid]
        assert cover.complex.vertices[cid][1] == cover.base.vertices[b][1]
        ct = cover.complex.vertices[cid][2]
        bt = cover.base.vertices[b][2]
        if ct != "dirichlet":
            assert ct == bt


def test_star_bijection_on_free_vertices():
    # total incident conductance at a free lift equals that at its image
    cover = derive_cover(CoverSpec(c6_mixed(), c6_mixed_voltage(), radius=2))
    base_deg = {}
    for u, v, c in cover.base.edges:
        base_deg[u] = base_deg.get(u, 0.0) + c
        base_deg[v] = base_deg.get(v, 0.0) + c
    cover_deg = {}
    for u, v, c in cover.complex.edges:
        cover_deg[u] = cover_deg.get(u, 0.0) + c
        cover_deg[v] = cover_deg.get(v, 0.0) + c
    for cid in range(cover.complex.n):
        if cover.complex.vertices[cid][2] == "dirichlet":
            continue
        assert cover_deg.get(cid, 0.0) == pytest.approx(
            base_deg[cover.projection[cid]], rel=1e-12
        )


def test_deck_action_is_an_automorphism_of_closed_covers():
    cover = derive_cover(CoverSpec(c3_pin_z3(), c3_pin_z3_voltage(), radius=1))
    gamma = (1, 2, 0)
    perm = {cid: cover.deck_action(gamma, cid) for cid in range(cover.complex.n)}
    assert None not in perm.values()
    assert sorted(perm.values()) == list(range(cover.complex.n))
    for cid, img in perm.items():
        assert cover.complex.vertices[cid][1] == cover.complex.vertices[img][1]
        assert cover.complex.vertices[cid][2] == cover.complex.vertices[img][2]
    orig = sorted((min(u, v), max(u, v), c) for u, v, c in cover.complex.edges)
    moved = sorted(
        (min(perm[u], perm[v]), max(perm[u], perm[v]), c)
        for u, v, c in cover.complex.edges
    )
    assert orig == moved


def test_deck_action_leaves_the_truncation_ball_as_none():
    base, volt = z_line()
    cover = derive_cover(CoverSpec(base, volt, radius=2))
    edge_vertex = cover.fiber[(0, (2,))]
    assert cover.deck_action((1,), edge_vertex) is None
    assert cover.deck_action((-1,), edge_vertex) == cover.fiber[(0, (1,))]


def test_lifted_eigenfunction_stays_an_eigenfunction():
    base = c3_pin_z3()
    cover = derive_cover(CoverSpec(base, c3_pin_z3_voltage(), radius=1))
    op_base = assemble_laplacian(base)
    res = lowest_eigenpairs(op_base, 1)
    full = np.zeros(base.n)
    for i, v in enumerate(op_base.free):
        full[v] = res.vectors[:, 0][i]
    lifted = lift_function(cover, full)
    op_cov = assemble_laplacian(cover.complex)
    g = lifted[op_cov.free]
    assert_allclose(op_cov.apply(g), res.eigenvalues[0] * g, atol=1e-10)


def test_radius_zero_with_open_voltages_is_rejected():
    base, volt = z_line()
    with pytest.raises(SpecdomError) as exc:
        derive_cover(CoverSpec(base, volt, radius=0))
    assert exc.value.code == "truncation"


def test_negative_radius_rejected():
    base, volt = z_line()
    with pytest.raises(SpecdomError):
        CoverSpec(base, volt, radius=-1)


# -- voltage serialization ------------------------------------------------------

def test_voltage_round_trip():
    base = c6_mixed()
    volt = c6_mixed_voltage()
    back = voltage_from_obj(volt.to_obj(base), base)
    assert back.sigma == volt.sigma
    assert back.group.kind == volt.group.kind


def test_voltage_file_round_trip(tmp_path):
    base, volt = wedge_f2()
    path = tmp_path / "voltage.json"
    write_voltage(volt, base, path)
    back = read_voltage(path, base)
    assert back.sigma == volt.sigma


def test_voltage_entry_count_must_match_edges():
    base = c6_mixed()
    obj = c6_mixed_voltage().to_obj(base)
    obj["voltages"] = obj["voltages"][:-1]
    with pytest.raises(SpecdomError) as exc:
        voltage_from_obj(obj, base)
    assert exc.value.code == "schema"


def test_voltage_entry_edge_mismatch_rejected():
    base = c6_mixed()
    obj = c6_mixed_voltage().to_obj(base)
    obj["voltages"][0]["u"] = 5
    with pytest.raises(SpecdomError) as exc:
        voltage_from_obj(obj, base)
    assert exc.value.code == "schema"


# -- phase-twisted spectra ------------------------------------------------------

def test_loop_band_is_the_cosine_profile():
    base, volt = z_line()
    for theta in (0.0, 0.5, 1.0, math.pi / 2, math.pi):
        lam = floquet_bottom(base, volt, [theta])
        assert lam == pytest.approx(2.0 - 2.0 * math.cos(theta), abs=1e-12)


def test_zero_phase_slice_equals_the_base_spectrum():
    base = c6_mixed()
    volt = c6_mixed_voltage()
    lam_base = lowest_eigenpairs(assemble_laplacian(base), 1).eigenvalues[0]
    assert floquet_bottom(base, volt, [0.0]) == pytest.approx(lam_base, abs=1e-12)


def test_all_unit_voltages_on_the_triangle_band_edges():
    base = cycle_graph(3)
    volt = VoltageAssignment(DeckGroup(kind="free_abelian", rank=1), [[1], [1], [1]])
    assert floquet_bottom(base, volt, [0.0]) == pytest.approx(0.0, abs=1e-12)
    assert floquet_bottom(base, volt, [math.pi]) == pytest.approx(1.0, abs=1e-12)


def test_floquet_minimum_sits_at_zero_phase():
    for base, volt in (z_line(), c3_z()):
        res = floquet_lambda0(base, volt, samples=64)
        assert res.theta == (0.0,)
        assert res.lambda_min == pytest.approx(0.0, abs=1e-12)


def test_floquet_needs_two_samples():
    base, volt = z_line()
    with pytest.raises(SpecdomError):
        floquet_lambda0(base, volt, samples=1)


# -- extrapolation ----------------------------------------------------------------

def test_richardson_recovers_inverse_square_limits():
    limit, scale = 0.7, 3.0
    pairs = [(r, limit + scale / r**2) for r in (4, 6, 9)]
    assert richardson_extrapolate(pairs) == pytest.approx(limit, abs=1e-12)


def test_richardson_input_validation():
    with pytest.raises(SpecdomError):
        richardson_extrapolate([(3, 1.0)])
    with pytest.raises(SpecdomError):
        richardson_extrapolate([(3, 1.0), (3, 0.9)])
