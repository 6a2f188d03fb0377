"""quasidiff: processes built from discontinuous scale functions and speed measures.

Turns a triple (interval, increasing scale, speed measure) into a concrete,
simulatable skip-free Markov process: regularization by scale completion and
darning, Dirichlet energies on both sides of the transformation, Feller
boundary classification, exact hitting/exit solves, path simulation, and
Monte Carlo cross-verification.
"""

from .boundary import FellerReport, classify_partial_sums, feller_classify, sigma_lambda
from .dirichlet import (
    ArclengthMaps,
    LiftedFunction,
    TripleFunction,
    arclength_maps,
    energy_image,
    energy_triple,
    lift,
    membership_F,
    transience,
    triple_function_from_host,
    unit_contraction,
)
from .gallery import (
    BirthDeathModel,
    UniquenessReport,
    birth_death,
    brownian_motion,
    cantor_examples,
    constant_speed_masses,
    random_walk,
    regular_diffusion,
    snapping_out,
)
from .exit_solver import (
    SkipFreeChain,
    exit_time_one_sided,
    exit_time_oracle,
    exit_times_absorbing,
    hitting_probability,
    hitting_probability_chain,
    speed_from_exit_times,
    window_chain,
)
from .regularize import (
    NearlyClosedSet,
    PullbackMap,
    RegularizedPackage,
    ValidationError,
    gaps,
    image_regularization,
    image_set,
    pullback_map,
)
from .scale import (
    GeneralizedScale,
    Jump,
    MeasureSpec,
    PiecewiseLinear,
    Triple,
    classify_endpoint_triple,
    compute_supports,
    decompose_scale,
    triple_from_json,
    triple_to_json,
    validate_triple,
)
from .simulate import (
    PathSample,
    build_chain,
    chain_from_package,
    discretize_measure,
    markov_local_time,
    project_unregularized,
    simulate_paths,
    skip_free_check,
    window_measure,
)
from .verify import (
    mc_exit_time,
    mc_hitting,
    mc_jump_rate_martingale,
    mc_martingale_scale,
    mc_speed_recovery,
    verify_suite,
)

__version__ = "0.1.0"
