"""Localized random perturbations and genericity experiments.

A perturbation multiplies the quantities touching a support set of
vertices by independent uniform factors from [1 - eps, 1 + eps], leaving
everything else bit-for-bit untouched.  The experiments probe the
claims that such localized roughening generically splits degenerate
eigenvalues and removes level ties of eigenfunctions, and that the low
spectrum moves continuously (Lipschitz-like in eps) under it.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass

import numpy as np

from .complexes import SpecdomError, WeightedComplex, assemble_laplacian
from .spectral import lowest_eigenpairs

PERTURB_MODES = ("conductances", "edge_lengths", "measures")


@dataclass(frozen=True)
class PerturbationSpec:
    support: frozenset[int]
    epsilon: float
    seed: int
    mode: str = "conductances"

    def __post_init__(self):
        object.__setattr__(self, "support", frozenset(int(v) for v in self.support))
        if not self.support:
            raise SpecdomError("invariant", "empty perturbation support")
        if not (0.0 <= self.epsilon < 1.0):
            raise SpecdomError(
                "invariant", f"epsilon must be in [0, 1), got {self.epsilon}"
            )
        if self.mode not in PERTURB_MODES:
            raise SpecdomError("schema", f"unknown perturbation mode {self.mode!r}")

    def to_obj(self) -> dict:
        return {
            "support": sorted(self.support),
            "epsilon": self.epsilon,
            "seed": self.seed,
            "mode": self.mode,
        }


def perturb(cx: WeightedComplex, spec: PerturbationSpec) -> WeightedComplex:
    """Multiplicatively roughen the quantities incident to the support.

    Factors are drawn in the storage order of the affected quantities
    from a generator seeded by spec.seed, so the output is a pure
    function of (cx, spec).  With epsilon = 0 the complex is returned
    unchanged up to identity factors.
    """
    for v in spec.support:
        if not (0 <= v < cx.n):
            raise SpecdomError("invariant", f"support vertex {v} does not exist")
    rng = np.random.default_rng(spec.seed)
    lo, hi = 1.0 - spec.epsilon, 1.0 + spec.epsilon

    if spec.mode == "conductances":
        touched = [i for i, (u, v, _) in enumerate(cx.edges) if u in spec.support or v in spec.support]
        if not touched:
            raise SpecdomError("invariant", "support touches no edges")
        factors = rng.uniform(lo, hi, size=len(touched))
        fac = dict(zip(touched, factors))
        edges = [
            (u, v, c * fac[i] if i in fac else c)
            for i, (u, v, c) in enumerate(cx.edges)
        ]
        return WeightedComplex(cx.vertices, edges, cx.triangles, cx.edge_lengths)

    if spec.mode == "measures":
        touched = sorted(spec.support)
        factors = rng.uniform(lo, hi, size=len(touched))
        fac = dict(zip(touched, factors))
        vertices = [
            (i, m * fac[i] if i in fac else m, t)
            for i, (_, m, t) in enumerate(cx.vertices)
        ]
        return WeightedComplex(vertices, cx.edges, cx.triangles, cx.edge_lengths)

    if cx.edge_lengths is None:
        raise SpecdomError("invariant", "edge_lengths mode needs a triangulated complex")
    touched = [
        i
        for i, (u, v, _) in enumerate(cx.edge_lengths)
        if u in spec.support or v in spec.support
    ]
    if not touched:
        raise SpecdomError("invariant", "support touches no edge lengths")
    factors = rng.uniform(lo, hi, size=len(touched))
    fac = dict(zip(touched, factors))
    lengths = [
        (u, v, l * fac[i] if i in fac else l)
        for i, (u, v, l) in enumerate(cx.edge_lengths)
    ]
    return WeightedComplex(
        cx.vertices, cx.edges, cx.triangles, [(u, v, l) for u, v, l in lengths]
    )


def _trial_seed(seed: int, trial: int) -> int:
    return int(np.random.SeedSequence((seed, trial)).generate_state(1, np.uint64)[0])


def wilson_interval(successes: int, n: int, z: float = 1.959963984540054):
    """95 percent score interval for a binomial fraction."""
    if n <= 0:
        raise SpecdomError("invariant", "empty sample")
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1.0 - p) / n + z * z / (4 * n * n)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass(frozen=True)
class ExperimentReport:
    kind: str
    spec: PerturbationSpec
    trials: int
    successes: int
    fraction: float
    wilson: tuple[float, float]
    extra: dict
    per_trial: tuple[bool, ...] | None = None

    def to_obj(self, include_per_trial: bool = False) -> dict:
        obj = {
            "experiment": self.kind,
            "spec": self.spec.to_obj(),
            "trials": self.trials,
            "successes": self.successes,
            "fraction": self.fraction,
            "wilson_interval": list(self.wilson),
            **self.extra,
        }
        if include_per_trial and self.per_trial is not None:
            obj["per_trial"] = [bool(x) for x in self.per_trial]
        return obj


def simplicity_experiment(
    cx: WeightedComplex,
    spec: PerturbationSpec,
    trials: int,
    gap_tol: float = 1e-6,
    k: int = 4,
) -> ExperimentReport:
    """Fraction of perturbations under which the k lowest eigenvalues
    are pairwise separated by more than gap_tol."""
    if trials < 1:
        raise SpecdomError("invariant", "need at least one trial")
    per_trial = []
    for t in range(trials):
        child = dataclasses.replace(spec, seed=_trial_seed(spec.seed, t))
        op = assemble_laplacian(perturb(cx, child))
        kk = min(k, op.dim)
        w = lowest_eigenpairs(op, kk).eigenvalues
        gaps = [w[j + 1] - w[j] for j in range(kk - 1)]
        per_trial.append(all(g > gap_tol for g in gaps))
    successes = sum(per_trial)
    return ExperimentReport(
        kind="simplicity",
        spec=spec,
        trials=trials,
        successes=successes,
        fraction=successes / trials,
        wilson=wilson_interval(successes, trials),
        extra={"gap_tol": gap_tol, "k": k},
        per_trial=tuple(per_trial),
    )


def morse_experiment(
    cx: WeightedComplex,
    spec: PerturbationSpec,
    trials: int,
    eigenindex: int = 1,
    tie_tol: float = 1e-12,
) -> ExperimentReport:
    """Fraction of perturbations under which the chosen eigenfunction has
    no value ties across edges between free vertices.

    Success requires no tie within tie_tol; the fraction of trials free
    of exact ties is reported alongside.
    """
    if trials < 1:
        raise SpecdomError("invariant", "need at least one trial")
    per_trial = []
    exact_ok = 0
    for t in range(trials):
        child = dataclasses.replace(spec, seed=_trial_seed(spec.seed, t))
        pcx = perturb(cx, child)
        op = assemble_laplacian(pcx)
        if eigenindex >= op.dim:
            raise SpecdomError("k_too_large", f"eigenindex {eigenindex} out of range")
        res = lowest_eigenpairs(op, eigenindex + 1)
        phi = res.vectors[:, eigenindex]
        val = {int(v): phi[i] for i, v in enumerate(op.free)}
        tol_tie = exact_tie = False
        for u, v, _ in pcx.edges:
            if u == v or u not in val or v not in val:
                continue
            d = abs(val[u] - val[v])
            if d <= tie_tol:
                tol_tie = True
            if d == 0.0:
                exact_tie = True
        per_trial.append(not tol_tie)
        exact_ok += not exact_tie
    successes = sum(per_trial)
    return ExperimentReport(
        kind="morse",
        spec=spec,
        trials=trials,
        successes=successes,
        fraction=successes / trials,
        wilson=wilson_interval(successes, trials),
        extra={
            "eigenindex": eigenindex,
            "tie_tol": tie_tol,
            "fraction_exact_tie_free": exact_ok / trials,
        },
        per_trial=tuple(per_trial),
    )


@dataclass(frozen=True)
class SweepTable:
    rows: tuple[tuple[float, float], ...]  # (epsilon, max eigenvalue deviation)
    slope: float  # least-squares deviation per epsilon, through the origin

    def to_obj(self) -> dict:
        return {
            "rows": [{"epsilon": e, "deviation": d} for e, d in self.rows],
            "slope": self.slope,
        }


def continuity_sweep(
    cx: WeightedComplex, spec: PerturbationSpec, epsilons, k: int = 4
) -> SweepTable:
    """Worst-case movement of the k lowest eigenvalues at several
    perturbation sizes, one independent draw per size."""
    epsilons = [float(e) for e in epsilons]
    if not epsilons or any(not (0.0 <= e < 1.0) for e in epsilons):
        raise SpecdomError("invariant", "epsilons must lie in [0, 1)")
    op0 = assemble_laplacian(cx)
    kk = min(k, op0.dim)
    base = np.array(lowest_eigenpairs(op0, kk).eigenvalues)
    rows = []
    for i, eps in enumerate(epsilons):
        child = dataclasses.replace(
            spec, epsilon=eps, seed=_trial_seed(spec.seed, i)
        )
        w = np.array(
            lowest_eigenpairs(assemble_laplacian(perturb(cx, child)), kk).eigenvalues
        )
        rows.append((eps, float(np.max(np.abs(w - base)))))
    ee = np.array([e for e, _ in rows])
    dd = np.array([d for _, d in rows])
    denom = float(ee @ ee)
    slope = float((ee @ dd) / denom) if denom > 0.0 else 0.0
    return SweepTable(rows=tuple(rows), slope=slope)


def write_report_json(report, path, envelope=None, include_per_trial=False):
    obj = (
        report.to_obj(include_per_trial=include_per_trial)
        if isinstance(report, ExperimentReport)
        else report.to_obj()
    )
    if envelope:
        obj = {**envelope, **obj}
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")
