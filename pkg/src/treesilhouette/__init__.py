"""Silhouettes of random binary search trees and digital search trees.

Exact tree functionals, samplers for their limit objects, and a seeded
Monte Carlo harness that checks the limit theory at desk scale.
"""

from .dyadic import DyadicRational
from .errors import (
    ConfigError,
    DepthExceeded,
    DomainError,
    DuplicateKey,
    EmptyPool,
    EmptySample,
    EmptyTree,
    FormatError,
    LengthMismatch,
    LevelOverflow,
    NotASilhouette,
    PrefixViolation,
    ResolutionTooCoarse,
    SilhouetteError,
)
from .experiments import REGISTRY, ExperimentConfig, Report, run_experiment
from .growth import (
    BitStream,
    TreeSequence,
    bst_build,
    dst_build,
    grow_dst,
    grow_dst_external,
    grow_uniform,
    grow_uniform_external,
    opt_eta_gap,
    random_bst,
    random_dst,
)
from .limits import (
    harmonic,
    mgf_eta_inf,
    mgf_zeta,
    psi_apply,
    sample_eta_inf,
    sample_findim_limit,
    sample_quicksort_limit,
    sample_rho_V,
    sample_zeta,
)
from .rng import RngStream
from .silhouette import (
    PLFunction,
    StepFunction,
    eta_of,
    eval_at,
    functionals,
    increments_dyadic,
    modulus_of_continuity,
    silhouette_of,
    tree_from_silhouette,
)
from .stats import EmpiricalDistribution, dist_stats
from .tree import (
    BinaryTree,
    LevelProfile,
    emit_tree,
    external_frontier,
    height_fill,
    level_profile,
    parse_tree,
    subtree_at,
    tree_codec,
    validate_tree,
)

__version__ = "0.1.0"
