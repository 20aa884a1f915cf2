"""Numerical laboratory for transfer operators of nonexpansive iterated
function systems with Dini potentials.

Build a system from expression strings, approximate its invariant set,
discretize the transfer operator T f(x) = sum_j p_j(x) f(w_j(x)) on a grid,
estimate its spectral radius and leading eigen-pair (primal function and
dual measure), mechanically check sufficient conditions for the convergence
theorem, and measure the geometric convergence rate empirically.
"""

from .attractor import AttractorMesh, build_attractor, invariance_gap, orbit_density_probe
from .backend import backend_name
from .conditions import (
    ConditionReport,
    ExampleSpec,
    StretchEstimate,
    build_paper_example,
    chain_stretch_bound,
    corollary_check,
    depth_k_check,
    distortion_audit,
    irreducibility_probe,
    local_stretch,
    main_theorem_check,
    single_branch_check,
)
from .config import ConfigError, RunConfig, load_config
from .convergence import ConvergenceReport, convergence_experiment
from .exprlang import DomainError, ParseError, evaluate, parse, to_source
from .funcs import BumpedComplement, ExprFunc, TentFunc
from .gridfn import GridFunction
from .measure import (
    DiscreteMeasure,
    apply_T_star,
    coarsen,
    duality_gap,
    pair_normalize,
    power_eigenmeasure,
    w1_distance,
)
from .operator import (
    EigenPair,
    SpectralEstimate,
    TransferOperator,
    apply_T,
    iterate_T,
    power_eigenfunction,
    sandwich_check,
    spectral_radius,
)
from .system import (
    DiniReport,
    IfsSystem,
    ModulusTable,
    compose_word,
    dini_sum,
    modulus_audit,
    weight_product,
)

__version__ = "0.1.0"

__all__ = [
    "AttractorMesh", "build_attractor", "invariance_gap", "orbit_density_probe",
    "backend_name",
    "ConditionReport", "ExampleSpec", "StretchEstimate", "build_paper_example",
    "chain_stretch_bound", "corollary_check", "depth_k_check",
    "distortion_audit", "irreducibility_probe", "local_stretch",
    "main_theorem_check", "single_branch_check",
    "ConfigError", "RunConfig", "load_config",
    "ConvergenceReport", "convergence_experiment",
    "DomainError", "ParseError", "evaluate", "parse", "to_source",
    "BumpedComplement", "ExprFunc", "TentFunc",
    "GridFunction",
    "DiscreteMeasure", "apply_T_star", "coarsen", "duality_gap",
    "pair_normalize", "power_eigenmeasure", "w1_distance",
    "EigenPair", "SpectralEstimate", "TransferOperator", "apply_T",
    "iterate_T", "power_eigenfunction", "sandwich_check", "spectral_radius",
    "DiniReport", "IfsSystem", "ModulusTable", "compose_word", "dini_sum",
    "modulus_audit", "weight_product",
    "__version__",
]
