"""Acceptance gate: one test per headline claim, at the stated tolerances.

Each test also enforces its runtime budget, so the suite doubles as a
regression guard against performance drift in the hot paths.
"""

import math
import time

import numpy as np
import pytest
import scipy.linalg as sla

from specdom.complexes import ExhaustionSpec, assemble_laplacian, restrict
from specdom.covering import CoverSpec, derive_cover, floquet_lambda0, richardson_extrapolate
from specdom.domains import build_fundamental_domain, improve_domain, random_fundamental_domain
from specdom.fixtures import (
    c4_pin_z2,
    c4_pin_z2_voltage,
    c6_mixed,
    c6_mixed_voltage,
    cycle_graph,
    octahedron,
    octahedron_height,
    p3_mixed,
    p5_mixed,
    p5_neumann,
    path_graph,
    random_complex,
    sym_tie,
    sym_tie_voltage,
    torus_grid,
    wedge_f2,
)
from specdom.genericity import (
    PerturbationSpec,
    continuity_sweep,
    morse_experiment,
    simplicity_experiment,
)
from specdom.morse import classify_critical
from specdom.spectral import barta_bound, deflated_resolvent, lowest_eigenpairs
from specdom.stochastic import (
    WalkConfig,
    harmonic_extension_mc,
    harmonic_extension_oracle,
    simulate_survival,
    survival_oracle,
)

GOLDEN_GAP = (3.0 - math.sqrt(5.0)) / 2.0


def lam0(cx):
    return lowest_eigenpairs(assemble_laplacian(cx), 1).eigenvalues[0]


def free_vertices(cx):
    return [v for v in range(cx.n) if cx.vertices[v][2] != "dirichlet"]


def test_A1_exact_spectra_of_the_three_reference_graphs():
    t0 = time.perf_counter()
    w = lowest_eigenpairs(assemble_laplacian(path_graph(3)), 3).eigenvalues
    np.testing.assert_allclose(w, [0.0, 1.0, 3.0], atol=1e-9)
    w = lowest_eigenpairs(assemble_laplacian(p3_mixed()), 2).eigenvalues
    np.testing.assert_allclose(
        w, [GOLDEN_GAP, (3.0 + math.sqrt(5.0)) / 2.0], atol=1e-9
    )
    w = lowest_eigenpairs(assemble_laplacian(cycle_graph(4)), 4).eigenvalues
    np.testing.assert_allclose(w, [0.0, 2.0, 2.0, 4.0], atol=1e-9)
    assert time.perf_counter() - t0 < 1.0


def test_A2_random_domains_never_beat_the_base_eigenvalue():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    cases = [
        (c6_mixed(), c6_mixed_voltage(), 3),
        (sym_tie(), sym_tie_voltage(), 2),
        (c4_pin_z2(), c4_pin_z2_voltage(), 2),
    ]
    for base, voltage, radius in cases:
        cover = derive_cover(CoverSpec(base, voltage, radius))
        bound = lam0(base) + 1e-12
        for _ in range(100):
            dom = random_fundamental_domain(cover, rng)
            assert dom.lambda0 <= bound
    assert time.perf_counter() - t0 < 30.0


def test_A3_seeded_search_attains_the_supremum_at_desk_scale():
    t0 = time.perf_counter()
    base = c6_mixed()
    cover = derive_cover(CoverSpec(base, c6_mixed_voltage(), 3))
    lam_base = lam0(base)
    seeded = build_fundamental_domain(cover)
    best = improve_domain(seeded, cover, budget=500)
    assert best.lambda0 >= seeded.lambda0
    assert best.lambda0 >= lam_base - 0.05 * lam_base
    assert best.lambda0 <= lam_base + 1e-12

    sym = sym_tie()
    sym_cover = derive_cover(CoverSpec(sym, sym_tie_voltage(), 2))
    dom = build_fundamental_domain(sym_cover)
    assert dom.max_defect <= 1e-12
    assert abs(dom.lambda0 - lam0(sym)) <= 1e-9
    assert time.perf_counter() - t0 < 60.0


def test_A4_barta_sandwich_over_a_thousand_positive_vectors():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    for _ in range(20):
        op = assemble_laplacian(random_complex(rng))
        res = lowest_eigenpairs(op, 1)
        lam = res.eigenvalues[0]
        for _ in range(50):
            phi = rng.uniform(0.1, 2.0, size=op.dim)
            b = barta_bound(op, phi)
            assert b.lower <= lam <= b.upper
        b0 = barta_bound(op, res.vectors[:, 0])
        assert abs(b0.lower - lam) <= 1e-8
        assert abs(b0.upper - lam) <= 1e-8
    assert time.perf_counter() - t0 < 30.0


def test_A5_exhaustions_decrease_and_strictly_so_on_contact():
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    strict_checks = 0
    for _ in range(20):
        cx = random_complex(rng, n_free=9, extra_edges=3, pins=1)
        free = free_vertices(cx)
        adj = {v: set() for v in free}
        for u, v, _ in cx.edges:
            if u != v and u in adj and v in adj:
                adj[u].add(v)
                adj[v].add(u)
        order = [int(rng.choice(sorted(free)))]
        chosen = {order[0]}
        while len(order) < len(free):
            frontier = sorted({w for v in chosen for w in adj[v]} - chosen)
            nxt = int(rng.choice(frontier))
            order.append(nxt)
            chosen.add(nxt)
        stages = [
            frozenset(order[: len(free) // 3]),
            frozenset(order[: 2 * len(free) // 3]),
            frozenset(free),
        ]
        exh = ExhaustionSpec(stages)

        lams, sups = [], []
        for j in range(3):
            op = assemble_laplacian(restrict(cx, exh, j))
            res = lowest_eigenpairs(op, 1)
            lams.append(res.eigenvalues[0])
            phi = res.vectors[:, 0]
            cut = 1e-6 * float(np.max(phi))
            sups.append({int(v) for v, x in zip(op.free, phi) if x >= cut})
        for j in range(2):
            assert lams[j + 1] <= lams[j] + 1e-12
            added = stages[j + 1] - stages[j]
            meets = any(
                (u in added and v in sups[j]) or (v in added and u in sups[j])
                for u, v, _ in cx.edges
            )
            if meets:
                assert lams[j + 1] < lams[j]
                strict_checks += 1
    assert strict_checks >= 20
    assert time.perf_counter() - t0 < 30.0


def test_A6_amenability_dichotomy_between_the_two_cover_families():
    t0 = time.perf_counter()
    # abelian side: the Floquet minimum sits at phase zero and recovers
    # the base eigenvalue exactly
    base = c6_mixed()
    fl = floquet_lambda0(base, c6_mixed_voltage(), samples=64)
    assert fl.theta == (0.0,)
    assert abs(fl.lambda_min - lam0(base)) <= 1e-10

    # free side: truncated covers of the two-loop wedge stay strictly
    # above the base value 0 and extrapolate to the regular-tree bottom
    cx, voltage = wedge_f2()
    radii = list(range(3, 10))
    values = []
    for r in radii:
        cover = derive_cover(CoverSpec(cx, voltage, r))
        values.append(lam0(cover.complex))
    for a, b in zip(values, values[1:]):
        assert b < a
    assert all(v > 0.0 for v in values)
    assert values[-1] == pytest.approx(0.67994040968554825, abs=1e-5)
    limit = 4.0 - 2.0 * math.sqrt(3.0)
    extrapolated = richardson_extrapolate(list(zip(radii, values)))
    assert abs(extrapolated - limit) < 0.05
    assert time.perf_counter() - t0 < 120.0


def test_A7_survival_curve_decays_at_the_bottom_eigenvalue():
    t0 = time.perf_counter()
    op = assemble_laplacian(p3_mixed())
    grid = tuple(float(t) for t in range(1, 21))
    cfg = WalkConfig(start=0, paths=100_000, horizon=20.0, grid=grid, seed=0)
    curve = simulate_survival(op, cfg)
    oracle = survival_oracle(op, 0, grid)
    for s, o in zip(curve.survival, oracle):
        se = math.sqrt(o * (1.0 - o) / cfg.paths)
        assert abs(s - o) <= 3.0 * se
    assert curve.rate is not None
    assert abs(curve.rate - GOLDEN_GAP) <= 3.0 * curve.rate_stderr
    assert time.perf_counter() - t0 < 60.0


def test_A8_exit_functionals_solve_the_shifted_boundary_problem():
    t0 = time.perf_counter()
    op = assemble_laplacian(p5_mixed())
    lam = 0.5 * lowest_eigenpairs(op, 1).eigenvalues[0]
    data = {4: 2.0}
    est, se = harmonic_extension_mc(op, lam, data, paths=100_000, seed=0)
    oracle = harmonic_extension_oracle(op, lam, data)
    for e, s, o in zip(est, se, oracle):
        assert abs(e - o) <= 3.0 * s

    ones, zeros = harmonic_extension_mc(op, 0.0, {4: 1.0}, paths=2000, seed=0)
    assert list(ones) == [1.0, 1.0, 1.0, 1.0]
    assert list(zeros) == [0.0, 0.0, 0.0, 0.0]
    assert time.perf_counter() - t0 < 60.0


def test_A9_perturbations_split_spectra_and_remove_ties():
    t0 = time.perf_counter()
    c4 = cycle_graph(4)
    rep = simplicity_experiment(
        c4,
        PerturbationSpec(support=frozenset(range(4)), epsilon=0.01, seed=0),
        trials=200,
        gap_tol=1e-6,
    )
    assert rep.fraction >= 0.99

    rep = morse_experiment(
        cycle_graph(6),
        PerturbationSpec(support=frozenset(range(6)), epsilon=0.05, seed=0),
        trials=200,
        eigenindex=1,
    )
    assert rep.fraction >= 0.95

    epsilons = [0.1, 0.01, 0.001]
    per_eps = [[], [], []]
    for s in range(50):
        spec = PerturbationSpec(support=frozenset(range(4)), epsilon=0.1, seed=s)
        tab = continuity_sweep(c4, spec, epsilons)
        for i, (_, dev) in enumerate(tab.rows):
            per_eps[i].append(dev)
    medians = [float(np.median(col)) for col in per_eps]
    assert medians[0] > medians[1] > medians[2]
    assert time.perf_counter() - t0 < 120.0


def test_A10_deflated_resolvent_inverts_symmetrically_and_matches_quadrature():
    t0 = time.perf_counter()
    op = assemble_laplacian(p5_neumann())
    res = lowest_eigenpairs(op, 2)
    S = op.stiffness.toarray()
    M = np.diag(op.mass)
    w, V = sla.eigh(S, M)

    def orthogonalize(f, j):
        for i in range(j + 1):
            pi = res.vectors[:, i]
            f = f - (pi @ (op.mass * f)) * pi
        return f

    rng = np.random.default_rng(11)
    for i, horizon, panels in ((0, 60.0, 6000), (1, 20.0, 4000)):
        lam, phi = res.eigenvalues[i], res.vectors[:, i]
        f = orthogonalize(rng.standard_normal(op.dim), i)
        g = orthogonalize(rng.standard_normal(op.dim), i)
        u = deflated_resolvent(op, lam, phi, f)
        v = deflated_resolvent(op, lam, phi, g)
        assert np.max(np.abs(op.apply(u) - lam * u - f)) <= 1e-10
        assert abs(f @ (op.mass * v) - g @ (op.mass * u)) <= 1e-10

        # independent oracle: truncated integral of the reweighted heat
        # semigroup, evaluated in the generalized eigenbasis
        coeffs = (V.T @ M) @ f
        ts = np.linspace(0.0, horizon, panels + 1)
        vals = V @ (np.exp(np.outer(lam - w, ts)) * coeffs[:, None])
        weights = np.ones(panels + 1)
        weights[1:-1:2] = 4.0
        weights[2:-1:2] = 2.0
        quad = (horizon / panels / 3.0) * (vals @ weights)
        assert np.max(np.abs(quad - u)) <= 1e-6
    assert time.perf_counter() - t0 < 10.0


def test_A11_morse_indices_sum_to_the_euler_characteristic():
    t0 = time.perf_counter()
    rep = classify_critical(octahedron(), octahedron_height())
    assert rep.tie_edges == ()
    assert rep.index_sum() == 2

    torus = torus_grid(4)
    f = np.random.default_rng(11).standard_normal(torus.n)
    rep = classify_critical(torus, f)
    assert rep.tie_edges == ()
    assert rep.index_sum() == 0
    assert time.perf_counter() - t0 < 1.0
