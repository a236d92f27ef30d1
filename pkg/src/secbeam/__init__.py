"""Beamforming with artificial-noise jamming for multiuser MIMO downlinks.

Transmit designs (coordinated zero-forcing, minimum-power joint beamforming,
MSE-constrained multicast), nullspace jamming, eavesdropper models and a
reproducible Monte Carlo experiment harness.
"""

from .artnoise import (
    NoiseCovariance,
    build_noise_covariance,
    effective_channel,
    nullspace_basis,
    sample_noise,
)
from .detect import ml_argmin, using_compiled_kernel
from .duality import (
    DualityState,
    InfeasibleTargets,
    gain_table,
    joint_design,
    solve_power_allocation,
    update_rx_beams,
    update_tx_beams,
)
from .eve import (
    BPSK,
    EveContext,
    build_eve_context,
    eve_ber_trial,
    eve_max_sinr,
    eve_ml_detect,
    whitening_matrix,
)
from .harness import (
    EXPERIMENTS,
    ExperimentSpec,
    ResultTable,
    SpecError,
    db_to_linear,
    linear_to_db,
    parse_spec_file,
    run_experiment,
    validate_spec,
)
from .model import (
    BeamformerSolution,
    ChannelSet,
    ScenarioConfig,
    TrialRecord,
    broadcast_sinr,
    complex_gaussian,
    generate_channels,
    mse_of_sinr,
    sinr_of_mse,
)
from .multicast import (
    SocpProblem,
    SocpSolution,
    build_socp_problem,
    multicast_design,
    multicast_sinr,
    solve_socp,
    update_multicast_rx,
)
from .socp import ConicResult, solve_cone_program, using_compiled_solver
from .zf import ZfWorkspace, zf_design, zf_power_allocation

__version__ = "0.1.0"
