"""Extremal POVM decomposition and certified randomness for qubit preparations.

Modules
-------
bloch       generalized Bloch vectors over the Gell-Mann basis
povm        rank-1 POVMs with validity checks and outcome statistics
decompose   convex decomposition into extremal POVMs
bounds      closed-form upper bounds on certifiable bits
certify     guessing probability and entropy optimization for two preparations
cli         command-line front end (``python -m qbound``)
"""

__version__ = "0.1.0"

from .bloch import (
    BlochBasis,
    QuditState,
    basis_matrices,
    bloch_angle_from_overlap,
    bloch_from_state,
    star_product,
    state_from_bloch,
)
from .bounds import BellScenario, PMScenario, bell_bound, min_entropy, pm_bound
from .certify import (
    CertificationResult,
    OptimizerConfig,
    OverlapScenario,
    TernaryParams,
    certify_params,
    close_ternary,
    entropy_curve,
    fitted_params,
    guessing_probability,
    honest_statistics,
    optimize_entropy,
)
from .decompose import (
    ConicalDependency,
    ConvexDecomposition,
    conical_split,
    decompose_extremal,
    dependency_split,
    find_conical_dependency,
    is_extremal,
    project_to_span,
    span_projector,
)
from .povm import Povm, PovmElement, from_matrices, probability, rank1_refine, to_matrices, validate
from .socp import BACKEND

__all__ = [
    "__version__",
    "BlochBasis",
    "QuditState",
    "basis_matrices",
    "bloch_angle_from_overlap",
    "bloch_from_state",
    "star_product",
    "state_from_bloch",
    "BellScenario",
    "PMScenario",
    "bell_bound",
    "min_entropy",
    "pm_bound",
    "CertificationResult",
    "OptimizerConfig",
    "OverlapScenario",
    "TernaryParams",
    "certify_params",
    "close_ternary",
    "entropy_curve",
    "guessing_probability",
    "honest_statistics",
    "fitted_params",
    "optimize_entropy",
    "ConicalDependency",
    "ConvexDecomposition",
    "conical_split",
    "decompose_extremal",
    "dependency_split",
    "find_conical_dependency",
    "is_extremal",
    "project_to_span",
    "span_projector",
    "Povm",
    "PovmElement",
    "from_matrices",
    "probability",
    "rank1_refine",
    "to_matrices",
    "validate",
    "BACKEND",
]
