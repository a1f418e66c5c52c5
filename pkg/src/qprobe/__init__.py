"""qprobe: simulate and size a qubit-assisted probe of coherence between
classical-like states of a damped macroscopic oscillator.

The package pairs a closed-form model (decoherence exponent, branch
amplitudes, feasibility conditions, hardware realization presets) with
direct numerical integration of the Markovian master equation on a
truncated Fock space, so each side can check the other.
"""

__version__ = "0.1.0"

from .analytic import (
    BranchAmplitudes,
    DimensionlessDesign,
    FeasibilityReport,
    PhysicalParams,
    analytic_joint_state,
    branch_amplitudes,
    decoherence_time,
    design_summary,
    diffusion_coefficient,
    feasibility,
    flux_lc_realization,
    ion_trap_realization,
    nbar,
    zero_temp_decoherence_time,
)
from .dynamics import (
    IntegratorConfig,
    ObservableSeries,
    Trajectory,
    build_hamiltonian,
    evolve,
    master_equation_rhs,
    trajectory_observables,
)
from .errors import (
    ConfigError,
    InfeasibleError,
    IntegrationError,
    ParameterError,
    QprobeError,
    TraceDriftError,
    TruncationError,
    TruncationLeakError,
)
from .hilbert import (
    CompositeDensity,
    SpaceDescriptor,
    build_space,
    embed,
    expectation,
    oscillator_operators,
    partial_trace_oscillator,
    qubit_coherence,
)
from .presets import load_preset, preset_names, reference_params
from .protocol import (
    ProtocolResult,
    SweepTable,
    ThermalProtocolResult,
    run_single,
    run_thermal,
    sweep,
)
from .states import (
    CoherentLabel,
    ThermalSpec,
    coherent_state,
    prepare_protocol_input,
    sample_coherent_label,
    thermal_state,
)
