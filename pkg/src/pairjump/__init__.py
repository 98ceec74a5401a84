"""Pair-interaction jump processes on the circle.

Exact event-driven simulation of three pairwise-interacting particle systems
(midpoint alignment, choose-the-leader, and energy-conserving pair rotation),
their kinetic limit equations, stationary pair correlations at finite N, a
finite-state master-equation oracle, and ensemble diagnostics tying the three
routes together.
"""

from .circle import (
    FourierDensity,
    GridDensity,
    NoiseSpec,
    TabulatedNoise,
    UniformNoise,
    VonMisesNoise,
    WrappedNormalNoise,
    circular_convolve,
    density_from_coeffs,
    fourier_coeffs,
    heat_kernel_spec,
    sample_grid_density,
    sample_noise,
    wrap_angle,
)
from .diagnostics import (
    EnsembleSummary,
    chaos_distance,
    compare_flow,
    iid_chaos_samples,
    resample_chaos_samples,
    summarize,
)
from .invariant import (
    CorrelationProfile,
    gamma_from_noise,
    heat_kernel_family,
    limit_profile,
    pair_correlation_closed,
    pair_correlation_series,
)
from .kinetic import (
    KineticConfig,
    bdg_evolve,
    bdg_gain,
    bdg_midpoint_pushforward,
    cl_evolve,
)
from .models import (
    EnsembleResult,
    JumpEvent,
    ModelSpec,
    SimulationResult,
    bdg_pair_update,
    cl_pair_update,
    kac_pair_update,
    kac_state,
    midpoint_angle,
    replay,
    replica_rng,
    sample_initial_chaotic,
    sample_kac_state,
    simulate,
    simulate_ensemble,
)
from .oracle import (
    JointDensity,
    TransitionMatrix,
    apply_generator,
    build_transition,
    marginal,
    pair_difference_profile,
    stationary,
)
from .verify import run_all, run_scenario

__version__ = "0.1.0"
