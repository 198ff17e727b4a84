"""Spotlight-SAR image reconstruction with joint 1D phase-error estimation.

The library reconstructs a complex reflectivity image from a phase history
corrupted by unknown per-aperture phase errors, alternating between an image
sub-problem (solved either by complex forward-backward splitting with a
closed-form magnitude-Cauchy prox, or by a Wirtinger fixed-point step through
a Hermitian CG solve) and a closed-form per-aperture phase update.
"""

from .autofocus import (
    AutofocusConfig,
    AutofocusResult,
    CostTrace,
    align_global_phase,
    aligned_phase_residual,
    make_default_config,
    phase_update,
    run_autofocus,
    update_corrupted_matrix,
)
from .cfba import (
    CfbaConfig,
    RealLifting,
    cfba_inner,
    estimate_lipschitz,
    lift_real,
    lift_vector,
    run_lifted_fb,
    unlift_vector,
    wirtinger_grad_fidelity,
)
from .errors import CgBreakdownError, ConfigurationError, NumericError
from .forward_model import (
    ObservationMatrix,
    PhaseErrorVector,
    PhaseHistory,
    RadarParams,
    SceneGrid,
    adjoint_image,
    apply_phase_error,
    build_observation_matrix,
    default_radar_params,
    make_scene_grid,
    sample_phase_errors,
    sigma_for_snr,
    simulate_phase_history,
    wrap_angle,
)
from .harness import ExperimentConfig, default_config, load_config, run_experiment
from .metrics import EvalReport, cost_J, entropy, mse
from .regularizers import (
    AuxiliaryB,
    RegularizerSpec,
    WeightOperator,
    auxiliary_b_star,
    cauchy_prox_magnitude,
    complex_prox,
    difference_matrices,
    k_value,
    penalty_value,
    tv_weight_operator,
    weight_diagonal,
)
from .scenes import make_builtin_scene
from .wama import (
    CgResult,
    NormalSystem,
    WamaConfig,
    assemble_normal_system,
    cg_solve,
    wama_f_step,
)

__version__ = "0.1.0"
