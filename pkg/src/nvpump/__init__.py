"""Rate-equation simulation of optical pumping of the N-V center electron spin."""

__version__ = "0.1.0"

from .errors import NVPumpError
from .model import (
    DEFAULT_RATES,
    Generator,
    RateConstants,
    audit_states,
    basis_state,
    build_generator,
    thermal_state,
    validate_state,
)
from .observables import (
    RabiCurve,
    ReadoutConfig,
    fluorescence_rate,
    polarization,
    rabi_contrast,
    rabi_signal,
    readout_counts,
    relax_to_ground,
)
from .propagator import (
    Accumulator,
    SegmentPropagator,
    propagate,
    propagate_with_accumulators,
    sample_trajectory,
    segment_propagator,
    singlet_accumulator,
)
from .sequence import (
    LoopPropagator,
    LoopRecord,
    PulseSchedule,
    SimulationResult,
    loop_dwell,
    loop_propagator,
    loop_transfer,
    make_pulse_train,
    run_schedule,
    steady_state_eigen,
    steady_state_iterative,
)
from .sweep import (
    FixedParams,
    SweepResult,
    SweepSpec,
    dwell_vs_polarization,
    optimize_schedule,
    power_scale,
    sweep,
)
