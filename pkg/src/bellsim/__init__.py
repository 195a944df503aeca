"""Desk-scale simulator for CHSH tests on two-photon states with colored noise."""

from .bellopt import (
    BellResult,
    ChshSettings,
    OptimizerOptions,
    beta_analytic,
    beta_surface,
    bell_value,
    correlation,
    horodecki_bound,
    maximize_general,
    maximize_restricted,
    maximize_state_restricted,
    observable,
    violation_threshold,
)
from .qcore import (
    DensityMatrix,
    colored_state,
    fidelity,
    mixed_noise_state,
    pauli,
    phi_plus,
    tensor,
    validate_state,
    werner_state,
)
from .sourcemodel import SourceParams, p_of_tau, state_at_delay, tau_for_p

__version__ = "0.1.0"
