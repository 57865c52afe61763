"""Command-line driver for the spectral-domain laboratory.

One subcommand per experiment family:

    specdom spectrum --input cx.json --output-dir out --k 4
    specdom domain   --input cx.json --voltage v.json --output-dir out
    specdom cover    --input cx.json --voltage v.json --output-dir out --sweep 3:9
    specdom mc       --input cx.json --output-dir out --paths 100000
    specdom generic  --input cx.json --output-dir out --experiment simplicity

Every output file embeds the tool version, the fully resolved
configuration, and the seed, so any result can be reproduced
bit-for-bit by re-running with the embedded settings.  Exit codes:
0 success, 1 rejected input or computation (machine-readable JSON on
stdout), 2 usage error.  Verbosity is controlled by the SPECDOM_LOG
environment variable (error, info, debug).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import __version__
from .complexes import SpecdomError, assemble_laplacian, read_complex, write_complex
from .covering import (
    CoverSpec,
    derive_cover,
    floquet_lambda0,
    read_voltage,
    richardson_extrapolate,
)
from .domains import build_fundamental_domain, improve_domain, write_domain
from .genericity import (
    PerturbationSpec,
    continuity_sweep,
    morse_experiment,
    simplicity_experiment,
    write_report_json,
)
from .spectral import lowest_eigenpairs, write_spectral_csv, write_spectral_json
from .stochastic import (
    WalkConfig,
    harmonic_extension_mc,
    harmonic_extension_oracle,
    simulate_survival,
    write_fit_json,
    write_survival_csv,
)

log = logging.getLogger("specdom")

ORACLE_LIMIT = 500  # dense extension oracle included below this many free vertices


class UsageError(Exception):
    pass


# -- plumbing --------------------------------------------------------------

def _require_file(path, what):
    if path is None:
        raise UsageError(f"{what} path is required")
    if not os.path.isfile(path):
        raise UsageError(f"{what} path {path!r} does not exist")
    return os.path.abspath(path)


def _prepare_output_dir(path):
    path = os.path.abspath(path)
    if os.path.exists(path) and not os.path.isdir(path):
        raise UsageError(f"output dir {path!r} exists and is not a directory")
    os.makedirs(path, exist_ok=True)
    return path


def _targets(args, names):
    """Resolve output paths up front; refuse to clobber without --force."""
    paths = {}
    for name in names:
        path = os.path.join(args.output_dir, name)
        if os.path.exists(path) and not args.force:
            raise SpecdomError(
                "overwrite", f"{path} already exists; pass --force to replace it"
            )
        paths[name] = path
    return paths


def _envelope(command, seed, config):
    return {
        "tool": "specdom",
        "version": __version__,
        "command": command,
        "seed": seed,
        "config": config,
    }


def _read_boundary(path, cx):
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SpecdomError("schema", f"malformed JSON in {path}: {exc}")
    if not isinstance(obj, dict):
        raise SpecdomError("schema", "boundary data must be an object {vertex: value}")
    out = {}
    for key, val in obj.items():
        try:
            v = int(key)
            out[v] = float(val)
        except (TypeError, ValueError):
            raise SpecdomError("schema", f"bad boundary entry {key!r}: {val!r}")
        if not (0 <= v < cx.n):
            raise SpecdomError("schema", f"boundary vertex {v} does not exist")
    return out


def _parse_sweep(text):
    try:
        lo, hi = (int(part) for part in text.split(":"))
    except ValueError:
        raise UsageError(f"--sweep wants LO:HI, got {text!r}")
    if lo < 0 or hi < lo:
        raise UsageError(f"bad sweep range {text!r}")
    return list(range(lo, hi + 1))


def _parse_floats(text):
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise UsageError(f"bad float list {text!r}")


def _parse_ints(text):
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise UsageError(f"bad integer list {text!r}")


# -- subcommands -----------------------------------------------------------

def cmd_spectrum(args):
    """Lowest eigenpairs of one complex: eigenvalues.csv + spectral.json."""
    input_path = _require_file(args.input, "--input")
    out = _targets(args, ["eigenvalues.csv", "spectral.json"])
    cx = read_complex(input_path)
    op = assemble_laplacian(cx)
    k = op.dim if args.k is None else args.k
    config = {
        "input": input_path,
        "k": k,
        "tol": args.tol,
        "vectors": bool(args.vectors),
        "threads": args.threads,
    }
    env = _envelope("spectrum", args.seed, config)
    log.info("spectrum: %d free vertices, k=%d", op.dim, k)
    result = lowest_eigenpairs(op, k, tol=args.tol)
    write_spectral_csv(result, out["eigenvalues.csv"], envelope=env)
    write_spectral_json(
        result, out["spectral.json"], include_vectors=args.vectors, envelope=env
    )
    return 0


def cmd_domain(args):
    """Morse-seeded fundamental domain plus hill-climb search.

    Writes the best domain found (domain.json) and a report with the
    base bottom eigenvalue, the seeded and searched domain values, the
    worst boundary defect, and the remaining gap.
    """
    input_path = _require_file(args.input, "--input")
    voltage_path = _require_file(args.voltage, "--voltage")
    out = _targets(args, ["domain.json", "report.json"])
    base = read_complex(input_path)
    voltage = read_voltage(voltage_path, base)
    config = {
        "input": input_path,
        "voltage": voltage_path,
        "radius": args.radius,
        "budget": args.budget,
        "threads": args.threads,
    }
    env = _envelope("domain", args.seed, config)

    cover = derive_cover(CoverSpec(base, voltage, args.radius))
    lam_base = lowest_eigenpairs(assemble_laplacian(base), 1).eigenvalues[0]
    seeded = build_fundamental_domain(cover)
    log.info("domain: seeded lambda0 %.12g (base %.12g)", seeded.lambda0, lam_base)
    best = improve_domain(seeded, cover, budget=args.budget)
    log.info("domain: searched lambda0 %.12g", best.lambda0)

    write_domain(best, out["domain.json"], envelope=env)
    report = {
        **env,
        "lambda0_base": lam_base,
        "lambda0_seeded": seeded.lambda0,
        "lambda0_searched": best.lambda0,
        "max_defect_seeded": seeded.max_defect,
        "max_defect": best.max_defect,
        "gap": lam_base - best.lambda0,
    }
    with open(out["report.json"], "w") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    return 0


def cmd_cover(args):
    """Derive a truncated cover; optional radius sweep and Floquet scan."""
    input_path = _require_file(args.input, "--input")
    voltage_path = _require_file(args.voltage, "--voltage")
    names = ["cover.json", "derived.json"]
    sweep_radii = _parse_sweep(args.sweep) if args.sweep else None
    if sweep_radii:
        names.append("sweep.csv")
    out = _targets(args, names)
    base = read_complex(input_path)
    voltage = read_voltage(voltage_path, base)
    config = {
        "input": input_path,
        "voltage": voltage_path,
        "radius": args.radius,
        "sweep": args.sweep,
        "grid_points": args.grid_points,
        "threads": args.threads,
    }
    env = _envelope("cover", args.seed, config)

    cover = derive_cover(CoverSpec(base, voltage, args.radius))
    op = assemble_laplacian(cover.complex)
    lam = lowest_eigenpairs(op, 1).eigenvalues[0]
    n_pinned = sum(1 for _, _, tag in cover.complex.vertices if tag == "dirichlet")
    doc = {
        **env,
        "group": cover.voltage.group.to_obj(),
        "radius": cover.radius,
        "closed": cover.closed,
        "vertices": cover.complex.n,
        "edges": len(cover.complex.edges),
        "free_vertices": cover.complex.n - n_pinned,
        "pinned_vertices": n_pinned,
        "lambda0": lam,
    }
    log.info("cover: %d vertices, lambda0 %.12g", cover.complex.n, lam)

    if cover.voltage.group.kind == "free_abelian":
        fl = floquet_lambda0(base, voltage, samples=args.grid_points)
        base_lam = lowest_eigenpairs(assemble_laplacian(base), 1).eigenvalues[0]
        doc["floquet"] = {
            "lambda_min": fl.lambda_min,
            "theta": list(fl.theta),
            "samples": fl.samples,
            "lambda0_base": base_lam,
            "gap": abs(fl.lambda_min - base_lam),
        }
        log.info("cover: floquet minimum %.12g at theta %s", fl.lambda_min, fl.theta)

    if sweep_radii:
        rows = []
        for r in sweep_radii:
            c = derive_cover(CoverSpec(base, voltage, r))
            v = lowest_eigenpairs(assemble_laplacian(c.complex), 1).eigenvalues[0]
            rows.append((r, v))
            log.info("cover: radius %d lambda0 %.12g", r, v)
        with open(out["sweep.csv"], "w", newline="") as fh:
            fh.write("# " + json.dumps(env) + "\n")
            fh.write("radius,lambda0\n")
            for r, v in rows:
                fh.write(f"{r},{v!r}\n")
        doc["sweep"] = {"rows": [[r, v] for r, v in rows]}
        if len(rows) >= 2:
            doc["sweep"]["extrapolated"] = richardson_extrapolate(rows)

    write_complex(cover.complex, out["derived.json"])
    with open(out["cover.json"], "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    return 0


def cmd_mc(args):
    """Killed-walk Monte Carlo.

    Without --lambda: survival curve from --start over a uniform time
    grid, with the tail-rate fit (survival.csv + fit.json).  With
    --lambda: harmonic extension estimates at every free vertex
    (extension.json), boundary data from --boundary or constant 1.
    """
    input_path = _require_file(args.input, "--input")
    boundary_path = (
        _require_file(args.boundary, "--boundary") if args.boundary else None
    )
    extension_mode = args.lam is not None
    out = _targets(
        args, ["extension.json"] if extension_mode else ["survival.csv", "fit.json"]
    )
    cx = read_complex(input_path)
    op = assemble_laplacian(cx)

    if extension_mode:
        f = (
            _read_boundary(boundary_path, cx)
            if boundary_path
            else {v: 1.0 for v, _, tag in cx.vertices if tag == "dirichlet"}
        )
        config = {
            "input": input_path,
            "lambda": args.lam,
            "paths": args.paths,
            "boundary": boundary_path,
            "kernel": args.kernel,
            "threads": args.threads,
        }
        env = _envelope("mc", args.seed, config)
        est, se = harmonic_extension_mc(
            op, args.lam, f, args.paths, args.seed, kernel=args.kernel
        )
        oracle = (
            harmonic_extension_oracle(op, args.lam, f) if op.dim <= ORACLE_LIMIT else None
        )
        doc = {
            **env,
            "boundary": {str(v): f[v] for v in sorted(f)},
            "rows": [
                {
                    "vertex": int(v),
                    "estimate": float(est[i]),
                    "stderr": float(se[i]),
                    "oracle": None if oracle is None else float(oracle[i]),
                }
                for i, v in enumerate(op.free)
            ],
        }
        with open(out["extension.json"], "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        log.info("mc: extension at lambda %.12g from %d vertices", args.lam, op.dim)
        return 0

    start = int(op.free[0]) if args.start is None else args.start
    grid = tuple(
        args.horizon * (i + 1) / args.grid_points for i in range(args.grid_points)
    )
    cfg = WalkConfig(
        start=start, paths=args.paths, horizon=args.horizon, grid=grid, seed=args.seed
    )
    config = {
        "input": input_path,
        "start": start,
        "paths": args.paths,
        "horizon": args.horizon,
        "grid_points": args.grid_points,
        "kernel": args.kernel,
        "threads": args.threads,
    }
    env = _envelope("mc", args.seed, config)
    curve = simulate_survival(op, cfg, kernel=args.kernel)
    write_survival_csv(curve, out["survival.csv"], envelope=env)
    write_fit_json(curve, out["fit.json"], envelope=env)
    if curve.rate is not None:
        log.info("mc: fitted rate %.6g +- %.2g", curve.rate, curve.rate_stderr)
    else:
        log.info("mc: no absorption observed, no rate fit")
    return 0


def cmd_generic(args):
    """Perturbation statistics: simplicity, morse, or continuity."""
    input_path = _require_file(args.input, "--input")
    out = _targets(args, ["report.json"])
    cx = read_complex(input_path)
    support = (
        frozenset(range(cx.n))
        if args.support is None
        else frozenset(_parse_ints(args.support))
    )

    if args.experiment == "continuity":
        epsilons = _parse_floats(args.epsilon) if args.epsilon else [0.1, 0.01, 0.001]
        spec = PerturbationSpec(
            support=support, epsilon=epsilons[0], seed=args.seed, mode=args.mode
        )
        config = {
            "input": input_path,
            "experiment": args.experiment,
            "epsilon": epsilons,
            "k": args.k,
            "mode": args.mode,
            "support": sorted(support),
            "threads": args.threads,
        }
        report = continuity_sweep(cx, spec, epsilons, k=args.k)
    else:
        if args.epsilon is None:
            eps = 0.01 if args.experiment == "simplicity" else 0.05
        else:
            values = _parse_floats(args.epsilon)
            if len(values) != 1:
                raise UsageError(f"{args.experiment} wants a single --epsilon")
            eps = values[0]
        spec = PerturbationSpec(
            support=support, epsilon=eps, seed=args.seed, mode=args.mode
        )
        config = {
            "input": input_path,
            "experiment": args.experiment,
            "epsilon": eps,
            "trials": args.trials,
            "mode": args.mode,
            "support": sorted(support),
            "threads": args.threads,
        }
        if args.experiment == "simplicity":
            config["gap_tol"] = args.gap_tol
            config["k"] = args.k
            report = simplicity_experiment(
                cx, spec, args.trials, gap_tol=args.gap_tol, k=args.k
            )
        else:
            config["eigenindex"] = args.eigenindex
            report = morse_experiment(
                cx, spec, args.trials, eigenindex=args.eigenindex
            )
        log.info(
            "generic: %s fraction %.4f over %d trials",
            args.experiment,
            report.fraction,
            args.trials,
        )

    env = _envelope("generic", args.seed, config)
    write_report_json(report, out["report.json"], envelope=env)
    return 0


# -- parser ----------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="specdom",
        description="Spectral experiments on weighted complexes and their covers.",
    )
    parser.add_argument(
        "--version", action="version", version=f"specdom {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--input", required=True, help="complex JSON")
        p.add_argument("--output-dir", required=True, help="directory for results")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument(
            "--threads",
            type=int,
            default=1,
            help="recorded in outputs; execution is serial in this build",
        )
        p.add_argument(
            "--force", action="store_true", help="overwrite existing outputs"
        )

    p = sub.add_parser("spectrum", help="lowest eigenpairs of one complex")
    common(p)
    p.add_argument("--k", type=int, default=None, help="eigenpair count (default: all)")
    p.add_argument("--tol", type=float, default=1e-10, help="residual tolerance")
    p.add_argument("--vectors", action="store_true", help="embed eigenvectors in JSON")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("domain", help="fundamental domain construction and search")
    common(p)
    p.add_argument("--voltage", required=True, help="voltage JSON")
    p.add_argument("--radius", type=int, default=6, help="truncation radius")
    p.add_argument("--budget", type=int, default=500, help="search evaluations")
    p.set_defaults(func=cmd_domain)

    p = sub.add_parser("cover", help="derived covers, sweeps, Floquet bands")
    common(p)
    p.add_argument("--voltage", required=True, help="voltage JSON")
    p.add_argument("--radius", type=int, default=4, help="truncation radius")
    p.add_argument("--sweep", default=None, help="radius sweep LO:HI")
    p.add_argument(
        "--grid-points", type=int, default=64, help="Floquet samples per dimension"
    )
    p.set_defaults(func=cmd_cover)

    p = sub.add_parser("mc", help="killed-walk Monte Carlo")
    common(p)
    p.add_argument("--paths", type=int, default=10000)
    p.add_argument("--horizon", type=float, default=20.0)
    p.add_argument("--grid-points", type=int, default=64, help="survival grid size")
    p.add_argument("--start", type=int, default=None, help="start vertex (default: first free)")
    p.add_argument(
        "--lambda",
        dest="lam",
        type=float,
        default=None,
        help="harmonic-extension mode at this eigenvalue shift",
    )
    p.add_argument("--boundary", default=None, help="boundary values JSON (extension mode)")
    p.add_argument(
        "--kernel",
        choices=["pure", "compiled"],
        default=None,
        help="force a walk kernel (default: compiled when available)",
    )
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("generic", help="perturbation statistics")
    common(p)
    p.add_argument(
        "--experiment",
        choices=["simplicity", "morse", "continuity"],
        default="simplicity",
    )
    p.add_argument(
        "--epsilon",
        default=None,
        help="perturbation size; comma list for continuity",
    )
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--support", default=None, help="comma-separated vertex ids")
    p.add_argument(
        "--mode",
        choices=["conductances", "edge_lengths", "measures"],
        default="conductances",
    )
    p.add_argument("--gap-tol", type=float, default=1e-6)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--eigenindex", type=int, default=1)
    p.set_defaults(func=cmd_generic)

    return parser


def main(argv=None):
    level = os.environ.get("SPECDOM_LOG", "error")
    if level not in ("error", "info", "debug"):
        print(f"specdom: SPECDOM_LOG must be error, info or debug, got {level!r}",
              file=sys.stderr)
        return 2
    logging.basicConfig(
        level=getattr(logging, level.upper()),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        print("specdom: --threads must be positive", file=sys.stderr)
        return 2
    if args.threads > 1:
        log.info("threads=%d recorded; execution is serial in this build", args.threads)
    try:
        args.output_dir = _prepare_output_dir(args.output_dir)
        return args.func(args)
    except UsageError as exc:
        print(f"specdom: {exc}", file=sys.stderr)
        return 2
    except SpecdomError as exc:
        print(json.dumps({"error": exc.code, "message": str(exc)}))
        return 1


if __name__ == "__main__":
    sys.exit(main())
