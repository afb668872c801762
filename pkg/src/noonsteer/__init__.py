"""EPR-steering numerics for lossy two-mode NOON states."""

from .errors import (
    ConvergenceFailure,
    DegenerateChannel,
    DimTooSmall,
    EnvelopeFailure,
    InsufficientBinOccupancy,
    InvalidOutcome,
    NondiscriminatingPhase,
    NoonSteerError,
    NoThresholdInBracket,
    OutOfSupportedOrder,
    UnsupportedOrder,
    ZeroProbabilityConditioning,
)
from .fock import (
    ModeOperator,
    TwoModeKet,
    WavefunctionConvention,
    commutator_check,
    hermite,
    momentum_wavefunction,
    noon_state,
    operator_matrix,
    position_wavefunction,
)
from .inferred import (
    InferredMoments,
    compute_inferred_moments,
    conditional_quadrature_moment,
    inferred_commutator_modulus,
    inferred_number_variance,
    inferred_variance_quadrature,
    px_density,
)
from .lossy import (
    LOSSLESS,
    LossChannel,
    OneModeDensity,
    TwoModeDensity,
    conditional_density_given_x,
    conditional_number_b,
    lossy_noon_density,
    number_marginal_a,
)
from .quadrature import QuadratureGrid, build_grid, default_grid, integrate, integrate_abs
from .sampling import (
    ShotRecord,
    SteeringEstimate,
    estimate_steering,
    sample_number_pair,
    sample_quadrature_pair,
)
from .steering import (
    CoherenceReport,
    SteeringReport,
    SweepRow,
    caption_phase,
    coherence_inequality,
    e1p_closed_form,
    protocol_rhs,
    steering_functional,
    sweep,
    threshold_efficiency,
)

__version__ = "0.1.0"
