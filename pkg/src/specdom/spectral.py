"""Eigenvalue extraction, Rayleigh quotients and two-sided ratio bounds.

Everything here operates on an assembled :class:`LaplacianOperator` and
its generalized symmetric pencil (S, M) with diagonal mass M.  Dense
solves are used up to ``DENSE_LIMIT`` free vertices, shift-inverted
Lanczos beyond that.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .complexes import (
    ExhaustionSpec,
    LaplacianOperator,
    SpecdomError,
    WeightedComplex,
    assemble_laplacian,
    restrict,
)

DENSE_LIMIT = 2000

# relative spectral gap below which a level is treated as numerically
# degenerate for deflation purposes
GAP_TOL = 1e-8


@dataclass(frozen=True)
class SpectralResult:
    """Bottom of the spectrum of a pencil (S, M).

    Eigenvalues ascending, vectors mass-orthonormal with the sign fixed
    so the largest-magnitude entry of each vector is positive, residuals
    ``||S v - lam M v|| / ||M v||`` per pair.
    """

    eigenvalues: tuple[float, ...]
    vectors: np.ndarray  # column j pairs with eigenvalues[j]
    residuals: tuple[float, ...]
    method: str

    def to_obj(self, include_vectors: bool = False) -> dict:
        obj = {
            "eigenvalues": list(self.eigenvalues),
            "residuals": list(self.residuals),
            "method": self.method,
        }
        if include_vectors:
            obj["vectors"] = [list(col) for col in self.vectors.T]
        return obj


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    out = vectors.copy()
    for j in range(out.shape[1]):
        k = int(np.argmax(np.abs(out[:, j])))
        if out[k, j] < 0:
            out[:, j] = -out[:, j]
    return out


def lowest_eigenpairs(
    op: LaplacianOperator, k: int, tol: float = 1e-10, method: str = "auto"
) -> SpectralResult:
    """k smallest eigenpairs of the free-vertex pencil.

    Parameters
    ----------
    op : LaplacianOperator
    k : int
        Number of pairs, 1 <= k <= dim.
    tol : float
        Acceptance threshold on the relative residuals.
    method : {"auto", "dense", "iterative"}
        "auto" goes dense up to 2000 free vertices, shift-inverted
        Lanczos above.  The explicit values force one path, mainly so
        the two can be cross-checked on the same operator.
    """
    n = op.dim
    if not (1 <= k <= n):
        raise SpecdomError("k_too_large", f"requested {k} pairs from dimension {n}")
    if method not in ("auto", "dense", "iterative"):
        raise SpecdomError("invariant", f"unknown method {method!r}")
    if method == "auto":
        method = "dense" if n <= DENSE_LIMIT else "iterative"
    if method == "iterative" and k >= n - 1:
        method = "dense"  # Lanczos cannot deliver nearly-full spectra

    M = op.mass
    if method == "dense":
        S = op.stiffness.toarray()
        w, V = sla.eigh(S, np.diag(M))
        w, V = w[:k], V[:, :k]
        used = "dense"
    else:
        S = op.stiffness.tocsc()
        scale = float(np.max(np.abs(S.diagonal())) / np.min(M)) or 1.0
        sigma = -1e-3 * scale
        w, V = spla.eigsh(S, k=k, M=sp.diags(M).tocsc(), sigma=sigma, which="LM")
        order = np.argsort(w)
        w, V = w[order], V[:, order]
        used = "iterative"

    # enforce mass-normalization exactly (solvers already deliver it up
    # to roundoff) and the sign convention
    norms = np.sqrt(np.einsum("ij,i,ij->j", V, M, V))
    V = V / norms
    V = _fix_signs(V)

    res = []
    for j in range(k):
        r = op.stiffness @ V[:, j] - w[j] * (M * V[:, j])
        res.append(float(np.linalg.norm(r) / np.linalg.norm(M * V[:, j])))
    res = np.array(res)
    if np.any(res > tol):
        worst = int(np.argmax(res))
        raise SpecdomError(
            "convergence",
            f"pair {worst} has residual {res[worst]:.3e} above tol {tol:.1e}",
        )
    return SpectralResult(
        eigenvalues=tuple(float(x) for x in w),
        vectors=V,
        residuals=tuple(float(x) for x in res),
        method=used,
    )


def rayleigh(op: LaplacianOperator, f: np.ndarray) -> float:
    """Quadratic form over mass norm, f given on the free vertices."""
    f = np.asarray(f, dtype=float)
    if f.shape != (op.dim,):
        raise SpecdomError("invariant", f"expected vector of length {op.dim}")
    denom = float(f @ (op.mass * f))
    if denom <= 0.0:
        raise SpecdomError("invariant", "Rayleigh quotient of a null vector")
    return op.quadratic_form(f) / denom


@dataclass(frozen=True)
class BartaBound:
    """Two-sided enclosure of the bottom eigenvalue from one positive test
    function: min and max over free vertices of (L phi) / phi."""

    lower: float
    upper: float
    argmin: int  # original vertex ids
    argmax: int


def barta_bound(op: LaplacianOperator, phi: np.ndarray) -> BartaBound:
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (op.dim,):
        raise SpecdomError("invariant", f"expected vector of length {op.dim}")
    if np.any(phi <= 0.0):
        bad = int(op.free[int(np.argmin(phi))])
        raise SpecdomError(
            "positivity", f"test function not strictly positive, e.g. vertex {bad}"
        )
    ratios = op.apply(phi) / phi
    i_lo = int(np.argmin(ratios))
    i_hi = int(np.argmax(ratios))
    return BartaBound(
        lower=float(ratios[i_lo]),
        upper=float(ratios[i_hi]),
        argmin=int(op.free[i_lo]),
        argmax=int(op.free[i_hi]),
    )


def exhaustion_lambda0(
    cx: WeightedComplex, exh: ExhaustionSpec
) -> list[tuple[int, float]]:
    """Bottom eigenvalue along an increasing exhaustion.

    Each stage pins everything outside it; by domain monotonicity the
    resulting sequence is non-increasing and converges down to the bottom
    of the full spectrum at the final stage.
    """
    exh.validate_for(cx)
    out = []
    for j in range(len(exh.stages)):
        op = assemble_laplacian(restrict(cx, exh, j))
        lam0 = lowest_eigenpairs(op, 1).eigenvalues[0]
        out.append((j, lam0))
    return out


def deflated_resolvent(
    op: LaplacianOperator,
    eigenvalue: float,
    eigenvector: np.ndarray,
    f: np.ndarray,
    orth_tol: float = 1e-10,
) -> np.ndarray:
    """Solve (L - lam) u = f on the mass-orthogonal complement of the
    eigenvector, for a simple eigenvalue lam.

    The solve is the bordered system

        [ S - lam M   M phi ] [u]   [M f]
        [ (M phi)^T     0   ] [a] = [ 0 ]

    which is nonsingular exactly when lam is simple.  Rejected when the
    eigenvalue is numerically degenerate (spectral gap below
    ``GAP_TOL * (1 + |lam|)``) or when f has a component along phi.
    """
    n = op.dim
    if n > DENSE_LIMIT:
        raise SpecdomError(
            "dimension", f"deflated solve is dense only, dimension {n} too large"
        )
    phi = np.asarray(eigenvector, dtype=float)
    f = np.asarray(f, dtype=float)
    if phi.shape != (n,) or f.shape != (n,):
        raise SpecdomError("invariant", f"expected vectors of length {n}")
    M = op.mass
    mphi = M * phi
    nphi = float(np.sqrt(phi @ mphi))
    if nphi <= 0.0:
        raise SpecdomError("invariant", "eigenvector has zero mass norm")
    phi = phi / nphi
    mphi = mphi / nphi

    # confirm lam sits on the spectrum and is isolated
    S = op.stiffness.toarray()
    w = sla.eigh(S, np.diag(M), eigvals_only=True)
    i = int(np.argmin(np.abs(w - eigenvalue)))
    tol = GAP_TOL * (1.0 + abs(eigenvalue))
    if abs(w[i] - eigenvalue) > tol:
        raise SpecdomError(
            "invariant",
            f"{eigenvalue} is not an eigenvalue (nearest {w[i]})",
        )
    for j in (i - 1, i + 1):
        if 0 <= j < n and abs(w[j] - w[i]) <= tol:
            raise SpecdomError(
                "degenerate",
                f"eigenvalue {w[i]} has neighbour at gap {abs(w[j] - w[i]):.3e}",
            )

    fnorm = float(np.sqrt(f @ (M * f)))
    if fnorm > 0.0 and abs(phi @ (M * f)) > orth_tol * fnorm:
        raise SpecdomError(
            "orthogonality",
            f"right-hand side has component {(phi @ (M * f)):.3e} along the eigenvector",
        )

    A = np.zeros((n + 1, n + 1))
    A[:n, :n] = S - eigenvalue * np.diag(M)
    A[:n, n] = mphi
    A[n, :n] = mphi
    rhs = np.zeros(n + 1)
    rhs[:n] = M * f
    sol = sla.solve(A, rhs)
    return sol[:n]


# -- serialization ------------------------------------------------------

def write_spectral_csv(result: SpectralResult, path, envelope=None):
    with open(path, "w", newline="") as fh:
        if envelope:
            fh.write("# " + json.dumps(envelope) + "\n")
        writer = csv.writer(fh)
        writer.writerow(["index", "eigenvalue", "residual"])
        for j, (lam, r) in enumerate(zip(result.eigenvalues, result.residuals)):
            writer.writerow([j, repr(lam), repr(r)])


def write_spectral_json(result: SpectralResult, path, include_vectors=False, envelope=None):
    obj = result.to_obj(include_vectors=include_vectors)
    if envelope:
        obj = {**envelope, **obj}
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")
