"""Quantum efficiency of binary-outcome qubit detectors.

Library layout:

  states    qubit pure states and density matrices
  qnd       six-parameter QND detector algebra and the seven efficiency metrics
  povm      general two-outcome channels as checked superoperators
  models    indirect-projective, thresholded-linear, phase-qubit, and
            tunneling-into-continuum detector models
  oracles   quadrature, Monte Carlo, and discretized-continuum verifiers
  sweeps    CSV parameter sweeps, figure presets, efficiency maximizer
  verify    bundled oracle-equivalence and property suites
  cli       `qndeff` command-line front end
"""

from ._version import __version__
from .states import (
    EQUAL_SUPERPOSITION,
    EXCITED,
    GROUND,
    PureState,
    QubitState,
    StateValidationError,
)
from .qnd import (
    EfficiencyReport,
    ImpossibleOutcomeError,
    OutcomeResult,
    QndDetector,
    UndefinedAverageError,
    apply_outcome,
    average_transform,
    compose_sequential,
    d_min,
    efficiency_report,
    outcome_probabilities,
)
from .povm import (
    BinarySuperoperator,
    InvalidChannelError,
    apply,
    check_completeness,
    extract_qnd,
    from_qnd,
)
from .models import (
    IndirectProjectiveConfig,
    LinearDetectorConfig,
    PhaseQubitConfig,
    TunnelingConfig,
    estimate_d0_from_visibility,
    indirect_projective_detector,
    linear_d0,
    linear_d1,
    linear_detector,
    linear_ensemble_eta,
    linear_fidelities,
    phase_qubit_detector,
    tunneling_d1,
    tunneling_detector,
    tunneling_ensemble,
    visibility,
)
from .oracles import (
    ContinuumDiscretization,
    McEstimate,
    QuadLinearResult,
    TunnelingOdeResult,
    mc_detector_outcomes,
    mc_linear,
    quad_linear,
    solve_discretized_continuum,
)

__all__ = [name for name in dir() if not name.startswith("_")]
