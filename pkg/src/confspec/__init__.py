"""Confounding-strength estimation from the spectral measure of the regression vector.

A library plus CLI that quantifies how much of the dependence between a
d-dimensional cause vector and a scalar target is due to an unobserved scalar
common cause, by fitting the spectral weights of the regression vector on the
covariance eigenbasis to a two-parameter family.
"""

from .errors import (
    ClampedValueWarning,
    ConfspecError,
    ConfspecWarning,
    ConstantColumn,
    DegenerateSpectrumWarning,
    InputError,
    InvalidInput,
    IoError,
    NormalizationWarning,
    NumericalError,
    OutOfDomain,
    ParseError,
    SingularCovariance,
    SingularSupport,
    ZeroRegressionVector,
)
from .spectral import (
    DiscreteMeasure,
    EigenDecomposition,
    SymMatrix,
    eigendecompose,
    induced_measure,
    measure_expectation,
    moment,
    tracial_inducing_vector,
    tracial_measure,
)
from .scm import (
    Dataset,
    GroundTruth,
    ModelParams,
    beta_prime,
    correlative_strength,
    empirical_covariances,
    ground_truth,
    regression_vector,
    replication_rng,
    sample_dataset,
    sample_params,
    true_sigma_xx,
)
from .estimator import (
    ConfoundingEstimate,
    FamilyWeights,
    GridConfig,
    confounded_weights,
    distance,
    estimate,
    estimate_from_data,
    family_weights,
    normalize_dataset,
    observed_weights,
    smoothing_matrix,
)
from .transforms import (
    ComplexPoint,
    asymptotic_beta,
    beta_to_gamma,
    cauchy_transform,
    confounding_measure_identity,
    gamma_to_beta,
    multiplication_map,
    rank_one_perturb,
)
from .simulate import (
    SimulationRecord,
    permutation_pvalue,
    run_replication,
    simulation_sweep,
    summarize,
)
from .verify import CheckResult, measure_deviation, run_verify

__version__ = "0.1.0"
