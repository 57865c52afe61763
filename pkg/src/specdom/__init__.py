"""Spectral geometry of weighted complexes, their covers, and the
bottom of the spectrum.

The package studies, at desk scale, how the bottom Neumann eigenvalue
of a fundamental domain relates to the bottom of the base spectrum:
mixed-boundary Laplacians on weighted graphs and triangulated surfaces
(:mod:`~specdom.complexes`), eigensolvers and Collatz-Wielandt bounds
(:mod:`~specdom.spectral`), voltage-graph covers with Floquet bands
(:mod:`~specdom.covering`), critical-point analysis and ascent basins
(:mod:`~specdom.morse`), fundamental-domain construction and search
(:mod:`~specdom.domains`), killed-walk Monte Carlo
(:mod:`~specdom.stochastic`), perturbation statistics
(:mod:`~specdom.genericity`), and ready-made fixtures
(:mod:`~specdom.fixtures`).
"""

__version__ = "0.1.0"

from .complexes import (
    ExhaustionSpec,
    LaplacianOperator,
    SpecdomError,
    WeightedComplex,
    assemble_laplacian,
    effective_graph,
    read_complex,
    restrict,
    write_complex,
)
from .covering import (
    Cover,
    CoverSpec,
    DeckGroup,
    FloquetResult,
    VoltageAssignment,
    derive_cover,
    floquet_lambda0,
    lift_function,
    read_voltage,
    richardson_extrapolate,
    write_voltage,
)
from .domains import (
    FundamentalDomain,
    build_fundamental_domain,
    improve_domain,
    lambda0_of_domain,
    random_fundamental_domain,
    superlevel_check,
    write_domain,
)
from .genericity import (
    ExperimentReport,
    PerturbationSpec,
    SweepTable,
    continuity_sweep,
    morse_experiment,
    perturb,
    simplicity_experiment,
    wilson_interval,
)
from .morse import (
    BasinDecomposition,
    CriticalReport,
    ascend_basins,
    classify_critical,
)
from .spectral import (
    BartaBound,
    SpectralResult,
    barta_bound,
    deflated_resolvent,
    exhaustion_lambda0,
    lowest_eigenpairs,
    rayleigh,
)
from .stochastic import (
    SurvivalCurve,
    WalkConfig,
    harmonic_extension_mc,
    harmonic_extension_oracle,
    heat_kernel_oracle,
    simulate_survival,
    survival_oracle,
)

__all__ = [
    "__version__",
    "BartaBound",
    "BasinDecomposition",
    "Cover",
    "CoverSpec",
    "CriticalReport",
    "DeckGroup",
    "ExhaustionSpec",
    "ExperimentReport",
    "FloquetResult",
    "FundamentalDomain",
    "LaplacianOperator",
    "PerturbationSpec",
    "SpecdomError",
    "SpectralResult",
    "SurvivalCurve",
    "SweepTable",
    "VoltageAssignment",
    "WalkConfig",
    "WeightedComplex",
    "ascend_basins",
    "assemble_laplacian",
    "barta_bound",
    "build_fundamental_domain",
    "classify_critical",
    "continuity_sweep",
    "deflated_resolvent",
    "derive_cover",
    "effective_graph",
    "exhaustion_lambda0",
    "floquet_lambda0",
    "harmonic_extension_mc",
    "harmonic_extension_oracle",
    "heat_kernel_oracle",
    "improve_domain",
    "lambda0_of_domain",
    "lift_function",
    "lowest_eigenpairs",
    "morse_experiment",
    "perturb",
    "random_fundamental_domain",
    "rayleigh",
    "read_complex",
    "read_voltage",
    "restrict",
    "richardson_extrapolate",
    "simplicity_experiment",
    "simulate_survival",
    "superlevel_check",
    "survival_oracle",
    "wilson_interval",
    "write_complex",
    "write_domain",
    "write_voltage",
]
