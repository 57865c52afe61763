"""Killed continuous-time walks, survival curves and exit-time functionals.

The walk jumps out of a free vertex v at rate (total conductance at
v) / mu(v), picks its destination with probability proportional to the
edge conductance, and dies on jumping to a pinned vertex.  The survival
probability from a fixed start decays like exp(-lambda0 t), which gives
a purely probabilistic route to the bottom eigenvalue; the tail rate is
recovered by weighted least squares on the log survival curve.

Exit-time functionals E[exp(lam tau) f(X_tau)] solve the lam-shifted
boundary problem as long as lam stays safely below lambda0, and the
estimator variance blows up as 2 lam approaches lambda0, which is why
the margin rejection is not cosmetic.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .complexes import LaplacianOperator, SpecdomError
from .spectral import lowest_eigenpairs
from . import walkcore

EXPM_LIMIT = 500

# grid points enter the tail fit only with this many surviving paths
FIT_MIN_COUNT = 25
FIT_WINDOW_FRACTION = 0.4


@dataclass(frozen=True)
class WalkConfig:
    start: int
    paths: int
    horizon: float
    grid: tuple[float, ...]
    seed: int

    def __post_init__(self):
        if self.paths < 1:
            raise SpecdomError("invariant", "need at least one path")
        if not (self.horizon > 0.0):
            raise SpecdomError("invariant", f"horizon must be positive, got {self.horizon}")
        g = self.grid
        if not g or any(b <= a for a, b in zip(g, g[1:])):
            raise SpecdomError("invariant", "grid must be non-empty and increasing")
        if g[0] < 0.0 or g[-1] > self.horizon:
            raise SpecdomError("invariant", "grid must lie within [0, horizon]")
        if self.seed < 0:
            raise SpecdomError("invariant", "seed must be non-negative")


@dataclass(frozen=True)
class WalkTables:
    """Kernel-ready jump tables in free-index space."""

    indptr: np.ndarray
    codes: np.ndarray
    cum: np.ndarray
    rates: np.ndarray


def walk_tables(op: LaplacianOperator) -> WalkTables:
    entries: list[list[tuple[int, float]]] = [[] for _ in range(op.dim)]
    tags = op.complex.tags
    for u, v, c in op.effective_edges:
        fu, fv = tags[u] != "dirichlet", tags[v] != "dirichlet"
        if fu:
            entries[op.index[u]].append((op.index[v] if fv else -(v + 1), c))
        if fv:
            entries[op.index[v]].append((op.index[u] if fu else -(u + 1), c))
    indptr = np.zeros(op.dim + 1, dtype=np.int64)
    codes = []
    cum = []
    rates = np.zeros(op.dim)
    for i, ent in enumerate(entries):
        total = 0.0
        for code, c in ent:
            total += c
            codes.append(code)
            cum.append(total)
        indptr[i + 1] = len(codes)
        rates[i] = total / op.mass[i]
    return WalkTables(
        indptr=indptr,
        codes=np.array(codes, dtype=np.int64),
        cum=np.array(cum, dtype=np.float64),
        rates=rates,
    )


@dataclass(frozen=True)
class SurvivalCurve:
    times: tuple[float, ...]
    survival: tuple[float, ...]
    stderr: tuple[float, ...]
    paths: int
    seed: int
    start: int
    rate: float | None
    rate_stderr: float | None
    intercept: float | None
    window: tuple[float, float] | None

    def to_fit_obj(self) -> dict:
        return {
            "rate": self.rate,
            "rate_stderr": self.rate_stderr,
            "intercept": self.intercept,
            "window": list(self.window) if self.window else None,
            "paths": self.paths,
            "seed": self.seed,
        }


def _fit_tail(times, counts, n_paths):
    """WLS fit of log survival over the late reliable window.

    Eligible points keep at least FIT_MIN_COUNT survivors; the window is
    the last ceil(0.4 * len(eligible)) of them, at least two.  Weights
    are the inverse variances of log s, n s / (1 - s).
    """
    eligible = [i for i, c in enumerate(counts) if c >= FIT_MIN_COUNT]
    if len(eligible) < 2:
        raise SpecdomError(
            "fit",
            f"only {len(eligible)} grid points kept {FIT_MIN_COUNT} survivors "
            f"out of {n_paths} paths, cannot fit a tail",
        )
    m = max(2, math.ceil(FIT_WINDOW_FRACTION * len(eligible)))
    window = eligible[-m:]
    s = np.array([counts[i] / n_paths for i in window])
    if np.any(s >= 1.0):
        raise SpecdomError("fit", "no decay inside the fit window")
    t = np.array([times[i] for i in window])
    w = n_paths * s / (1.0 - s)
    X = np.column_stack([np.ones_like(t), t])
    y = np.log(s)
    XtW = X.T * w
    cov = np.linalg.inv(XtW @ X)
    beta = cov @ (XtW @ y)
    rate = -float(beta[1])
    rate_se = float(np.sqrt(cov[1, 1]))
    return rate, rate_se, float(beta[0]), (float(t[0]), float(t[-1]))


def simulate_survival(
    op: LaplacianOperator, cfg: WalkConfig, kernel: str | None = None
) -> SurvivalCurve:
    """Monte Carlo survival curve with a tail-rate fit.

    The fit is attempted only when some path was absorbed; a complex
    with no pinned vertex reachable from the start yields the constant
    curve and no rate.
    """
    if cfg.start not in op.index:
        raise SpecdomError("invariant", f"start vertex {cfg.start} is not free")
    tables = walk_tables(op)
    taus, _ = walkcore.run_paths(
        tables.indptr,
        tables.codes,
        tables.cum,
        tables.rates,
        op.index[cfg.start],
        cfg.paths,
        cfg.seed,
        horizon=cfg.horizon,
        force=kernel,
    )
    counts = [int(np.sum(taus > t)) for t in cfg.grid]
    survival = [c / cfg.paths for c in counts]
    stderr = [math.sqrt(s * (1.0 - s) / cfg.paths) for s in survival]
    if np.any(np.isfinite(taus)):
        rate, rate_se, intercept, window = _fit_tail(cfg.grid, counts, cfg.paths)
    else:
        rate = rate_se = intercept = window = None
    return SurvivalCurve(
        times=tuple(cfg.grid),
        survival=tuple(survival),
        stderr=tuple(stderr),
        paths=cfg.paths,
        seed=cfg.seed,
        start=cfg.start,
        rate=rate,
        rate_stderr=rate_se,
        intercept=intercept,
        window=window,
    )


def heat_kernel_oracle(op: LaplacianOperator, t: float) -> np.ndarray:
    """Dense exp(-t L) on the free vertices, small problems only."""
    if op.dim > EXPM_LIMIT:
        raise SpecdomError(
            "dimension",
            f"dense heat kernel limited to {EXPM_LIMIT} vertices, got {op.dim}",
        )
    if t < 0.0:
        raise SpecdomError("invariant", "negative time")
    A = op.stiffness.toarray() / op.mass[:, None]
    return sla.expm(-t * A)


def survival_oracle(op: LaplacianOperator, start: int, times) -> np.ndarray:
    """Exact survival probabilities via the heat semigroup."""
    if start not in op.index:
        raise SpecdomError("invariant", f"start vertex {start} is not free")
    row = op.index[start]
    return np.array([float(heat_kernel_oracle(op, t)[row].sum()) for t in times])


def harmonic_extension_oracle(op: LaplacianOperator, lam: float, f: dict) -> np.ndarray:
    """Solve (L - lam) u = 0 with boundary data f on pinned vertices."""
    b = np.zeros(op.dim)
    tags = op.complex.tags
    for u, v, c in op.effective_edges:
        fu, fv = tags[u] != "dirichlet", tags[v] != "dirichlet"
        if fu and not fv:
            b[op.index[u]] += c * f[v]
        elif fv and not fu:
            b[op.index[v]] += c * f[u]
    A = op.stiffness.toarray() - lam * np.diag(op.mass)
    return sla.solve(A, b)


def harmonic_extension_mc(
    op: LaplacianOperator,
    lam: float,
    f: dict,
    paths: int,
    seed: int,
    margin: float = 0.05,
    kernel: str | None = None,
):
    """Estimate E[exp(lam tau) f(X_tau)] from every free vertex.

    Rejected unless lam <= (1 - margin) * lambda0: the functional itself
    diverges at lambda0, and the sample variance already diverges at
    lambda0 / 2, so estimates near the cutoff need seed-aware tests.
    Returns (estimates, stderrs) indexed like op.free.
    """
    lam0 = lowest_eigenpairs(op, 1).eigenvalues[0]
    if lam > (1.0 - margin) * lam0:
        raise SpecdomError(
            "margin",
            f"lam {lam} above the stability margin {(1.0 - margin) * lam0:.6g} "
            f"(lambda0 {lam0:.6g})",
        )
    tables = walk_tables(op)
    if not np.any(tables.codes < 0):
        raise SpecdomError("invariant", "no absorbing boundary anywhere")
    exit_ids = sorted({int(-c - 1) for c in tables.codes if c < 0})
    missing = [v for v in exit_ids if v not in f]
    if missing:
        raise SpecdomError("invariant", f"boundary data missing at vertices {missing}")
    fvals = np.zeros(op.complex.n)
    for vid, val in f.items():
        fvals[vid] = val

    est = np.zeros(op.dim)
    se = np.zeros(op.dim)
    for i in range(op.dim):
        taus, exits = walkcore.run_paths(
            tables.indptr,
            tables.codes,
            tables.cum,
            tables.rates,
            i,
            paths,
            seed,
            path_offset=i * paths,
            horizon=math.inf,
            force=kernel,
        )
        if not np.all(np.isfinite(taus)):
            raise SpecdomError(
                "divergence", f"walks from vertex {op.free[i]} failed to reach the boundary"
            )
        samples = np.exp(lam * taus) * fvals[exits]
        est[i] = samples.mean()
        se[i] = samples.std(ddof=1) / math.sqrt(paths) if paths > 1 else math.inf
    return est, se


# -- serialization --------------------------------------------------------

def write_survival_csv(curve: SurvivalCurve, path, envelope=None):
    with open(path, "w", newline="") as fh:
        if envelope:
            fh.write("# " + json.dumps(envelope) + "\n")
        writer = csv.writer(fh)
        writer.writerow(["t", "survival", "stderr"])
        for t, s, e in zip(curve.times, curve.survival, curve.stderr):
            writer.writerow([repr(t), repr(s), repr(e)])


def write_fit_json(curve: SurvivalCurve, path, envelope=None):
    obj = curve.to_fit_obj()
    if envelope:
        obj = {**envelope, **obj}
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")
