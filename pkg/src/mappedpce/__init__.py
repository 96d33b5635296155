"""Polynomial chaos surrogates with conformally mapped bases.

Build orthonormal polynomial expansions of a model over random inputs on
[-1,1]^N, with optional coordinate-wise conformal maps that push the
basis (and its Gauss quadrature) toward the geometry of the model's
singularities, and read moments and sensitivity indices directly off the
coefficients.
"""

from .conformal import (
    ConformalMap1D,
    IdentityMap,
    MultivariateMap,
    OddPolynomialMap,
    identity_map,
    map_from_spec,
    polynomial_continuation,
    sausage9,
)
from .density import (
    Beta,
    JointDensity,
    TransformedDensity,
    Uniform,
    density_from_spec,
    transform_density,
)
from .exceptions import (
    ConfigError,
    DomainError,
    InvalidMapError,
    MappedPceError,
    NumericalError,
    ProjectionError,
    SurrogateFormatError,
    TableIngestionError,
)
from .models import (
    ParametricModel,
    RLCModel,
    TabulatedModel,
    bernstein_rate,
    interaction_toy_model,
    mapped_bernstein_rate,
    rlc_pole_locations,
    runge_model,
    runge_poles,
    runge_product_model,
    tabulated_from_csv,
)
from .orthopoly import (
    OrthonormalBasis1D,
    RecurrenceCoefficients,
    golub_welsch,
    jacobi_recurrence,
    legendre_recurrence,
    recurrence_coefficients,
    stieltjes,
)
from .pce import (
    PCBasis,
    Surrogate,
    coefficient_decay,
    load_surrogate,
    project,
    save_surrogate,
    tensor_index_set,
)
from .quadrature import (
    QuadratureRule1D,
    TensorQuadrature,
    export_nodes_csv,
    gauss_rule,
    mapped_rule,
    read_nodes_csv,
    tensor_rule,
)
from .stats import (
    cross_validation_error,
    mean,
    rms_validation_error,
    sobol_indices,
    std,
    variance,
    write_moments_csv,
    write_sobol_csv,
)
from .study import (
    StudyResult,
    StudyRow,
    default_maps,
    fit_decay_slope,
    fit_rate,
    reference_moments,
    run_study,
)

__version__ = "0.1.0"
