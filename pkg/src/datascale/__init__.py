"""Data scaling curve fitting, analysis, and corpus tooling."""

__version__ = "0.1.0"

from .core import (
    Observation,
    PowerLaw,
    TailLaw,
    JointLawParams,
    LinearFit,
    capacity_constant,
    eval_joint_law,
    eval_law,
    eval_law_gradient,
)
from .errors import (
    DataScaleError,
    DomainError,
    DuplicateAbscissaError,
    ExponentMismatchError,
    InsufficientDataError,
    MonteCarloError,
    ParseError,
    RankError,
    SchemaError,
    SingularityError,
)
from .fitting import (
    FitConfig,
    FitResult,
    GridOracleResult,
    GridSpec,
    JointFitResult,
    SharedFitResult,
    TailFitResult,
    fit_joint,
    fit_linear,
    fit_shared,
    fit_single,
    fit_tail,
    grid_oracle,
)
from .analysis import (
    McConfig,
    McSummary,
    asymptotic_loss,
    capacity_limited_derivative,
    data_equivalence_factor,
    data_limited_derivative,
    marginal_value,
    mc_uncertainty,
    predict,
    regime_derivative_crossing,
    transition_point,
)
from .corpus import (
    CorruptionSpec,
    SentencePair,
    corrupt_chars,
    delete_words,
    filter_top_fraction,
    read_pairs,
    sample_subset,
    shuffle_pairs,
    write_pairs,
)
from .observations import (
    ObservationTable,
    load_observations,
    simulate,
    simulate_joint,
    write_observations,
)

__all__ = [
    "__version__",
    "Observation",
    "PowerLaw",
    "TailLaw",
    "JointLawParams",
    "LinearFit",
    "capacity_constant",
    "eval_joint_law",
    "eval_law",
    "eval_law_gradient",
    "DataScaleError",
    "DomainError",
    "DuplicateAbscissaError",
    "ExponentMismatchError",
    "InsufficientDataError",
    "MonteCarloError",
    "ParseError",
    "RankError",
    "SchemaError",
    "SingularityError",
    "FitConfig",
    "FitResult",
    "GridOracleResult",
    "GridSpec",
    "JointFitResult",
    "SharedFitResult",
    "TailFitResult",
    "fit_joint",
    "fit_linear",
    "fit_shared",
    "fit_single",
    "fit_tail",
    "grid_oracle",
    "McConfig",
    "McSummary",
    "asymptotic_loss",
    "capacity_limited_derivative",
    "data_equivalence_factor",
    "data_limited_derivative",
    "marginal_value",
    "mc_uncertainty",
    "predict",
    "regime_derivative_crossing",
    "transition_point",
    "CorruptionSpec",
    "SentencePair",
    "corrupt_chars",
    "delete_words",
    "filter_top_fraction",
    "read_pairs",
    "sample_subset",
    "shuffle_pairs",
    "write_pairs",
    "ObservationTable",
    "load_observations",
    "simulate",
    "simulate_joint",
    "write_observations",
]
