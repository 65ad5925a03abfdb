"""Closed-form spectra of two-setting Bell operators and violation optimizers."""

from ._backend import BACKEND
from .bell_operator import (
    CHSH,
    BellCoefficients,
    BellOperator,
    MeasurementFrame,
    canonical_mk_frame,
    mk_coefficients,
    mk_operator,
    prime,
    random_planar_frame,
)
from .errors import (
    BellSpecError,
    CapacityError,
    GuardedDenominator,
    InvalidInputError,
    NumericError,
    UndefinedValueError,
)
from .mk_identities import (
    EigenvalueProfile,
    anticommutator_value,
    bn_squared_closed,
    commutator_closed,
    degeneracy_check,
    mermin3_constraint,
    p_bar,
    trace_b2,
)
from .spectral import GhzEigenpair, SpectralDecomposition, f_all, f_omega, full_spectrum, theta_lambda
from .states import QuantumState
from .violation import (
    CorrelationTensor3,
    OptimizerConfig,
    ViolationResult,
    bound_lower,
    bound_upper,
    correlation_tensor,
    mermin3_from_tensor,
    optimize_expectation,
    psi_family,
    s2_exact,
    s_guess,
    sweep_phi,
    table1_states,
)

__version__ = "0.1.0"
