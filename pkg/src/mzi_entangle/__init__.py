"""Heralded entanglement of two spectrally distinct emitters in a Mach-Zehnder interferometer."""

__version__ = "0.1.0"

from .channel import (
    BitFlipPolicy,
    apply_outcome,
    bit_flip,
    initial_state,
    lossless_closed_form,
    outcome_probabilities,
)
from .entanglement import concurrence, concurrence_pure, purity, spin_flipped
from .errors import (
    DegenerateState,
    EmptyCandidates,
    InvalidConfig,
    NotNormalized,
    NumericalFailure,
    ZeroPhotons,
    ZeroProbabilityOutcome,
)
from .optics import DetectorModel, MeasurementChannel, SpinBranch, detection_kernels
from .physics import (
    Emitter,
    EmitterPair,
    beta_factor,
    candidate_frequencies,
    loss_amplitude,
    select_probe_frequency,
    transmission_amplitude,
)
from .trajectory import SimulationConfig, parameter_sweep, run_ensemble, run_trajectory

__all__ = [
    "BitFlipPolicy",
    "DegenerateState",
    "DetectorModel",
    "Emitter",
    "EmitterPair",
    "EmptyCandidates",
    "InvalidConfig",
    "MeasurementChannel",
    "NotNormalized",
    "NumericalFailure",
    "SimulationConfig",
    "SpinBranch",
    "ZeroPhotons",
    "ZeroProbabilityOutcome",
    "apply_outcome",
    "beta_factor",
    "bit_flip",
    "candidate_frequencies",
    "concurrence",
    "concurrence_pure",
    "detection_kernels",
    "initial_state",
    "loss_amplitude",
    "lossless_closed_form",
    "outcome_probabilities",
    "parameter_sweep",
    "purity",
    "run_ensemble",
    "run_trajectory",
    "select_probe_frequency",
    "spin_flipped",
    "transmission_amplitude",
]
