"""Numerical toolkit for hidden quantum nonlocality.

Detects CHSH violation of bipartite states before and after local filtering,
searches for ancilla states that activate a violation, and verifies the
Bell-diagonal cone machinery behind the activation construction.
"""

__version__ = "0.1.0"

from .numerics import DEFAULT_POLICY, NumericPolicy
from .qcore import (
    DensityOperator,
    Dims,
    HermitianOperator,
    KrausMap,
    partial_trace,
    partial_transpose,
    party_tensor,
)
from .states import load_state, maximally_entangled, random_density, save_state, werner
from .chsh import (
    Behavior,
    Measurement,
    chsh_value,
    correlation_matrix,
    horodecki,
    optimal_measurements,
)
from .filtering import (
    WitnessInstance,
    filtered_chsh,
    h_theta,
    search_c_membership,
    witness_value,
)
from .activation import ActivationConfig, activate, verify_certificate

__all__ = [
    "__version__",
    "DEFAULT_POLICY",
    "NumericPolicy",
    "DensityOperator",
    "Dims",
    "HermitianOperator",
    "KrausMap",
    "partial_trace",
    "partial_transpose",
    "party_tensor",
    "load_state",
    "maximally_entangled",
    "random_density",
    "save_state",
    "werner",
    "Behavior",
    "Measurement",
    "chsh_value",
    "correlation_matrix",
    "horodecki",
    "optimal_measurements",
    "WitnessInstance",
    "filtered_chsh",
    "h_theta",
    "search_c_membership",
    "witness_value",
    "ActivationConfig",
    "activate",
    "verify_certificate",
]
