"""Benchmark library for online and stochastic convex optimization:
algorithms, hard instance generators, and minimax rate calculus."""

from ._backend import backend_name
from .adversaries import (
    AdversarialInstance,
    lp_hard_instance,
    lp_hard_instance_full,
    read_gradients_csv,
    rotate,
    wlp_hard_instance,
    write_instance_csv,
)
from .geometry import (
    INF,
    NormDescriptor,
    SetDescriptor,
    best_in_hindsight,
    box,
    conjugate_exponent,
    dual_norm,
    lp_ball,
    lp_norm,
    norm_from_config,
    norm_to_config,
    qhull,
    set_from_config,
    set_to_config,
    support_value,
    weighted_lr_ball,
    weighted_lr_norm,
)
from .harness import (
    ExperimentConfig,
    RegretTrace,
    fit_exponent,
    median_by_cell,
    parse_config,
    plot_csv,
    read_table_csv,
    run_experiment,
    sweep,
    write_table_csv,
    write_trace_csv,
)
from .mirror_maps import Euclidean, MirrorMap, PNorm, bregman, grad_h, grad_h_star
from .mirror_maps import FullEuclidean as FullEuclideanMap
from .optimizers import (
    OGD,
    AdaGradDiag,
    AlgorithmSpec,
    DiagScaled,
    DualAveraging,
    FullEuclidean,
    OptimizerState,
    PNormMD,
    RunResult,
    adagrad_bound,
    final_regret,
    init_state,
    md_regret_bound,
    pnorm_default_stepsize,
    pnorm_regret_bound,
    regret_curve,
    run,
    step,
)
from .rates import (
    RateBound,
    SaddleBracket,
    diag_bound_value,
    gv_packing,
    hull_upper_rate,
    ksparse_lower,
    minimax_rate,
    optimal_lambda,
    saddle_bruteforce,
    separation_and_kl,
)
from .stochastic_instances import (
    StochasticInstance,
    assouad_constants,
    calibrated_delta,
    dense_sign,
    gradient_sequence,
    one_dim,
    population_gap,
    population_min,
    population_value,
    rect_abs,
    sample,
    sample_sequence,
    sparse_coord,
    subgradient,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
