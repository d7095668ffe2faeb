"""npqdsim: input-output model of a nondestructive photonic-qubit detector.

A single atom in a single-sided fibre cavity imprints a state-dependent
phase on reflected light; reading the atom out heralds a photon without
destroying its qubit.  This package computes the steady-state cavity
response, the full heralding protocol with dark-count corrections, the
polarization fidelity under cavity birefringence, pulse-shape
preservation, and the link budgets of the four application scenarios.
"""

from .applications import (
    LinkParams,
    SpeedupResult,
    bell_threshold_check,
    entanglement_speedup,
    qubit_amplification,
    snr_gain,
)
from .cavity import (
    BranchAmplitudes,
    SystemParams,
    branch_amplitudes,
    cooperativity,
    idealized,
    reflection_coefficient,
    reflection_spectrum,
    solve_coupling_strength,
    with_fitted_reflection,
)
from .config import Config, ConfigError, load_config, load_default
from .fock import (
    DensityMatrix,
    FockState,
    coherent_state,
    expectation,
    partial_trace,
    tensor,
    trace_distance,
)
from .polarization import (
    BirefringenceModel,
    PolarizationQubit,
    effective_rotation_angle,
    effective_rotation_angles,
    fidelity_table,
    output_fidelity,
    reflect_polarization,
    rotation_corrected_fidelity,
)
from .protocol import (
    ConditioningError,
    FiguresOfMerit,
    JointState,
    apply_mw_rotation,
    build_joint_state,
    build_joint_state_explicit,
    conditional_reflection_bound,
    conditioned_mean_photon,
    detection_prob_conditional,
    detection_prob_unconditional,
    figures_of_merit,
    g2_conditioned,
    sweep_figures_of_merit,
)
from .pulse import (
    Waveform,
    apply_transfer,
    double_hump_pulse,
    gaussian_pulse,
    intensity_overlap,
    rising_exponential_pulse,
)

__version__ = "0.1.0"
