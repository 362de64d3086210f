"""Unbiasedness and Bayes estimation as a pair of adjoint linear operators."""

from .consistency import ConsistencyRow, exact_consistency_table, monte_carlo_consistency
from .decompose import DecompResult, decompose_param, decompose_sample, solve_unbiased
from .errors import NotEstimable, UnbayesError
from .model import (
    ModelSpace,
    ParameterGrid,
    SampleSpace,
    build_model,
    builtin_model,
    inner_m,
    inner_pi,
)
from .operators import (
    SubspaceBasis,
    adjointness_residual,
    apply_B,
    apply_U,
    null_basis_B,
    null_basis_U,
    range_basis_B,
    range_basis_U,
)
from .orthopoly import OrthoBasis, bayes_expansion, build_ortho_basis, expansion_remainder
from .risk import RiskReport, bayes_risk, risk_via_bias, theorem1_split

__version__ = "0.1.0"
