"""Fluid-antenna moving-port channel prediction.

Synthesizes time-varying multipath channels, estimates path parameters from
uplink samples with a 2-D matrix pencil, selects the fluid-antenna port that
keeps the served channel close to a frozen reference, evaluates the
closed-form error theory against Monte Carlo oracles, and runs a multi-UE
downlink simulation with zero-forcing precoding.
"""

from .channel import (
    ChannelSnapshot,
    Path,
    PathSet,
    ScenarioSpec,
    add_noise,
    doppler_from_velocity,
    generate_scenario,
    steering_vector,
    synthesize_channel,
)
from .geometry import FluidAntennaGeometry, UpaGeometry, wavelength_of
from .kernels import backend
from .pencil import (
    EstimatedModel,
    PencilConfig,
    RawEstimates,
    build_block_2d,
    build_hankel_1d,
    default_pencil_config,
    estimate_half,
    estimate_model,
    estimate_model_order,
    pair_dopplers,
    reconstruct_channel,
    recover_angles,
)
from .portselect import (
    ErrorFunctional,
    PeriodInfo,
    PortSchedule,
    brute_force_port,
    build_schedule,
    compute_periods,
    error_norm_sq,
    select_port_los,
    select_port_multipath,
)
from .theory import (
    BoundInputs,
    bessel_j0,
    bound_inputs_from_geometry,
    cross_term_los_nlos,
    cross_term_nlos_nlos,
    los_mse_bound,
    monte_carlo_expectation,
    mse_bounds,
    non_cross_term,
)
from .linksim import (
    DropMetrics,
    SimScenario,
    ezf_precode,
    prediction_error_db,
    run_drop,
    simulate,
    sinr_se,
    vec_prony_predict,
)

__version__ = "0.1.0"
