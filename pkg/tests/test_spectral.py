"""Eigensolver contract, Rayleigh and Barta bounds, deflated resolvent."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from specdom.complexes import ExhaustionSpec, SpecdomError, assemble_laplacian
from specdom.covering import CoverSpec, derive_cover
from specdom.fixtures import (
    c6_mixed,
    cycle_graph,
    p3_mixed,
    p5_neumann,
    path_graph,
    random_complex,
    wedge_f2,
)
from specdom.spectral import (
    barta_bound,
    deflated_resolvent,
    exhaustion_lambda0,
    lowest_eigenpairs,
    rayleigh,
)

GOLDEN_GAP = (3.0 - math.sqrt(5.0)) / 2.0


# -- exact spectra -----------------------------------------------------------

def test_free_three_path_spectrum():
    op = assemble_laplacian(path_graph(3))
    res = lowest_eigenpairs(op, 3)
    assert_allclose(res.eigenvalues, [0.0, 1.0, 3.0], atol=1e-12)


def test_pinned_three_path_spectrum():
    op = assemble_laplacian(p3_mixed())
    res = lowest_eigenpairs(op, 2)
    assert_allclose(
        res.eigenvalues,
        [GOLDEN_GAP, (3.0 + math.sqrt(5.0)) / 2.0],
        atol=1e-12,
    )


def test_four_cycle_spectrum_has_a_double_eigenvalue():
    op = assemble_laplacian(cycle_graph(4))
    res = lowest_eigenpairs(op, 4)
    assert_allclose(res.eigenvalues, [0.0, 2.0, 2.0, 4.0], atol=1e-12)


# -- solver contract ---------------------------------------------------------

def test_vectors_are_mass_orthonormal():
    op = assemble_laplacian(c6_mixed())
    res = lowest_eigenpairs(op, 4)
    V = res.vectors
    G = V.T @ (op.mass[:, None] * V)
    assert_allclose(G, np.eye(4), atol=1e-10)


def test_sign_rule_largest_entry_positive():
    rng = np.random.default_rng(1)
    for _ in range(5):
        op = assemble_laplacian(random_complex(rng))
        res = lowest_eigenpairs(op, min(3, op.dim))
        for j in range(res.vectors.shape[1]):
            col = res.vectors[:, j]
            assert col[int(np.argmax(np.abs(col)))] > 0.0


def test_ground_state_is_strictly_positive():
    op = assemble_laplacian(c6_mixed())
    phi0 = lowest_eigenpairs(op, 1).vectors[:, 0]
    assert np.all(phi0 > 0.0)


def test_residuals_reported_and_small():
    op = assemble_laplacian(p3_mixed())
    res = lowest_eigenpairs(op, 2)
    assert len(res.residuals) == 2
    assert max(res.residuals) < 1e-10


def test_dense_and_iterative_paths_agree():
    base, volt = wedge_f2()
    cover = derive_cover(CoverSpec(base, volt, radius=5))
    op = assemble_laplacian(cover.complex)
    dense = lowest_eigenpairs(op, 3, method="dense")
    iterative = lowest_eigenpairs(op, 3, method="iterative")
    assert dense.method == "dense"
    assert iterative.method == "iterative"
    assert_allclose(dense.eigenvalues, iterative.eigenvalues, rtol=0, atol=1e-9)


def test_auto_method_is_dense_at_desk_scale():
    op = assemble_laplacian(p3_mixed())
    assert lowest_eigenpairs(op, 1).method == "dense"


def test_nearly_full_spectrum_falls_back_to_dense():
    op = assemble_laplacian(p5_neumann())
    res = lowest_eigenpairs(op, 5, method="iterative")
    assert res.method == "dense"
    assert_allclose(res.eigenvalues[0], 0.0, atol=1e-12)


def test_k_out_of_range_rejected():
    op = assemble_laplacian(p3_mixed())
    with pytest.raises(SpecdomError) as exc:
        lowest_eigenpairs(op, 3)
    assert exc.value.code == "k_too_large"
    with pytest.raises(SpecdomError):
        lowest_eigenpairs(op, 0)


# -- Rayleigh and Barta ------------------------------------------------------

def test_rayleigh_of_eigenvector_is_its_eigenvalue():
    op = assemble_laplacian(c6_mixed())
    res = lowest_eigenpairs(op, 2)
    for j in range(2):
        assert rayleigh(op, res.vectors[:, j]) == pytest.approx(
            res.eigenvalues[j], abs=1e-12
        )


def test_rayleigh_upper_bounds_lambda0():
    rng = np.random.default_rng(7)
    op = assemble_laplacian(p3_mixed())
    lam0 = lowest_eigenpairs(op, 1).eigenvalues[0]
    for _ in range(20):
        f = rng.standard_normal(op.dim)
        assert rayleigh(op, f) >= lam0 - 1e-12


def test_barta_sandwich_on_random_positive_vectors():
    rng = np.random.default_rng(3)
    for _ in range(5):
        op = assemble_laplacian(random_complex(rng))
        lam0 = lowest_eigenpairs(op, 1).eigenvalues[0]
        for _ in range(20):
            phi = rng.uniform(0.1, 2.0, size=op.dim)
            bb = barta_bound(op, phi)
            assert bb.lower <= lam0 + 1e-10
            assert bb.upper >= lam0 - 1e-10


def test_barta_equality_at_the_ground_state():
    op = assemble_laplacian(c6_mixed())
    res = lowest_eigenpairs(op, 1)
    bb = barta_bound(op, res.vectors[:, 0])
    assert bb.lower == pytest.approx(res.eigenvalues[0], abs=1e-8)
    assert bb.upper == pytest.approx(res.eigenvalues[0], abs=1e-8)


def test_barta_rejects_nonpositive_test_functions():
    op = assemble_laplacian(p3_mixed())
    with pytest.raises(SpecdomError) as exc:
        barta_bound(op, np.array([1.0, 0.0]))
    assert exc.value.code == "positivity"
    assert "vertex" in str(exc.value)


def test_barta_argmin_argmax_are_original_ids():
    op = assemble_laplacian(p3_mixed())
    bb = barta_bound(op, np.array([1.0, 1.0]))
    assert {bb.argmin, bb.argmax} <= {0, 1}


# -- exhaustion --------------------------------------------------------------

def test_exhaustion_sequence_on_the_five_path():
    cx = p5_neumann()
    exh = ExhaustionSpec([{2}, {1, 2, 3}, {0, 1, 2, 3, 4}])
    seq = exhaustion_lambda0(cx, exh)
    stages, values = zip(*seq)
    assert stages == (0, 1, 2)
    assert values[0] == pytest.approx(2.0, abs=1e-12)
    assert values[1] == pytest.approx(2.0 - math.sqrt(2.0), abs=1e-12)
    assert values[2] == pytest.approx(0.0, abs=1e-12)


# -- deflated resolvent ------------------------------------------------------

def _orthogonalize(op, vecs, f):
    for j in range(vecs.shape[1]):
        pj = vecs[:, j]
        f = f - (pj @ (op.mass * f)) * pj
    return f


def test_resolvent_inverts_on_the_complement():
    op = assemble_laplacian(p5_neumann())
    res = lowest_eigenpairs(op, 2)
    lam0, phi0 = res.eigenvalues[0], res.vectors[:, 0]
    rng = np.random.default_rng(10)
    f = _orthogonalize(op, res.vectors[:, :1], rng.standard_normal(op.dim))
    u = deflated_resolvent(op, lam0, phi0, f)
    assert_allclose(op.apply(u) - lam0 * u, f, atol=1e-10)
    assert abs(phi0 @ (op.mass * u)) < 1e-10


def test_resolvent_eigenbasis_identity():
    op = assemble_laplacian(p5_neumann())
    res = lowest_eigenpairs(op, 3)
    lam0, phi0 = res.eigenvalues[0], res.vectors[:, 0]
    for j in (1, 2):
        u = deflated_resolvent(op, lam0, phi0, res.vectors[:, j])
        expect = res.vectors[:, j] / (res.eigenvalues[j] - lam0)
        assert_allclose(u, expect, atol=1e-10)


def test_resolvent_is_mass_symmetric():
    op = assemble_laplacian(p5_neumann())
    res = lowest_eigenpairs(op, 1)
    lam0, phi0 = res.eigenvalues[0], res.vectors[:, 0]
    rng = np.random.default_rng(11)
    f = _orthogonalize(op, res.vectors, rng.standard_normal(op.dim))
    g = _orthogonalize(op, res.vectors, rng.standard_normal(op.dim))
    u = deflated_resolvent(op, lam0, phi0, f)
    v = deflated_resolvent(op, lam0, phi0, g)
    assert abs(f @ (op.mass * v) - g @ (op.mass * u)) < 1e-10


def test_resolvent_rejects_unorthogonal_data():
    op = assemble_laplacian(p5_neumann())
    res = lowest_eigenpairs(op, 1)
    lam0, phi0 = res.eigenvalues[0], res.vectors[:, 0]
    with pytest.raises(SpecdomError) as exc:
        deflated_resolvent(op, lam0, phi0, phi0.copy())
    assert exc.value.code == "orthogonality"


def test_resolvent_rejects_degenerate_eigenvalues():
    op = assemble_laplacian(cycle_graph(4))
    res = lowest_eigenpairs(op, 3)
    lam1, phi1 = res.eigenvalues[1], res.vectors[:, 1]  # double eigenvalue 2
    f = _orthogonalize(op, res.vectors[:, 1:2], np.ones(op.dim))
    with pytest.raises(SpecdomError) as exc:
        deflated_resolvent(op, lam1, phi1, f)
    assert exc.value.code == "degenerate"


def test_resolvent_matches_truncated_heat_quadrature():
    # the resolvent at an interior eigenvalue equals the time integral
    # of the reweighted semigroup, truncated where the tail is negligible
    op = assemble_laplacian(p5_neumann())
    res = lowest_eigenpairs(op, 2)
    lam1, phi1 = res.eigenvalues[1], res.vectors[:, 1]
    rng = np.random.default_rng(11)
    f = _orthogonalize(op, res.vectors[:, :2], rng.standard_normal(op.dim))
    u = deflated_resolvent(op, lam1, phi1, f)

    import scipy.linalg as sla

    S = op.stiffness.toarray()
    M = np.diag(op.mass)
    w, V = sla.eigh(S, M)
    coeffs = (V.T @ M) @ f
    horizon, panels = 20.0, 4000
    ts = np.linspace(0.0, horizon, panels + 1)
    vals = V @ (np.exp(np.outer(lam1 - w, ts)) * coeffs[:, None])
    weights = np.ones(panels + 1)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    quad = (horizon / panels / 3.0) * (vals @ weights)
    assert_allclose(quad, u, atol=1e-6)
