"""Negative surveys: respondents report a category they do not belong to.

Build design matrices, simulate surveys, recover unbiased population
proportions with covariance, and account for the information each answer
gives away.
"""

from .design import (
    DesignMatrix,
    InvertibilityReport,
    SelectionBounds,
    TieBreakModel,
    check_invertible,
    custom_design,
    two_option_design,
    two_option_selection_bounds,
    uniform_design,
)
from .errors import (
    DesignValidationError,
    DimensionMismatchError,
    DistributionError,
    ImpossibleConditioningError,
    InsufficientSampleError,
    InvalidCategoryCountError,
    NegativeSurveyError,
    SchemeDegenerateError,
    SingularDesignError,
    ValidationError,
)
from .estimation import (
    ProportionEstimate,
    ResponseTally,
    WaldInterval,
    covariance_hat,
    estimate_from_lambda,
    estimate_pi,
    estimate_pi_uniform,
    forward_lambda,
    project_to_simplex,
    wald_intervals,
)
from .privacy import (
    PrivacyReport,
    conditional_prior,
    entropy_bits,
    negative_info,
    positive_info,
    privacy_report,
)
from .simulation import (
    DEFAULT_SEED,
    ExperimentSummary,
    PopulationDistribution,
    RandomSource,
    RespondentTrace,
    Scheme,
    answer_die_procedure,
    answer_general,
    answer_two_option,
    monte_carlo,
    run_survey,
    sample_true_category,
)

__version__ = "0.1.0"
