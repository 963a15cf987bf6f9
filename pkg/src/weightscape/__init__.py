"""Forecast combination and model averaging under explicit weight constraints."""

from .errors import (ConvergenceError, DegenerateInputError, PanelError,
                     SingularProblemError, WeightscapeError)
from .panel import ForecastPanel, validate_panel
from .spaces import WeightSpace, contains, project
from .methods import (CrossValidation, Eigenvector, GeneralizedMallows,
                      Performance, Regression, SoftPenalized, parse_method)
from .solution import DiagnosticsReport, Multipliers, WeightSolution
from .qp import (QuadraticObjective, SpectralDecomposition,
                 certify_interior_uniqueness, solve_equality_qp,
                 solve_inequality_qp, solve_unit_norm, spectral_decomposition)
from .estimators import (MallowsInputs, build_loo_forecasts, estimate_sigma2,
                         fit_cv, fit_eigenvector, fit_generalized_mallows,
                         fit_performance, fit_regression, fit_soft_penalized,
                         mallows_inputs)
from .diagnostics import (UniquenessReport, VarianceReport, chebyshev_length,
                          check_sparsity_conditions, check_uniqueness,
                          conditional_variance, diagnostics_report,
                          empirical_bias, error_autocorrelation, msfe,
                          msfe_bound, shrinkage_covariance, ssr,
                          variance_bound)
from .conformal import (SelectionResult, conformal_quantile, ols_group_trainer,
                        select_space, split_indices)
from .simulation import (ScenarioSpec, beta_profile, build_candidate_sets,
                         emit_tables, fit_candidates, generate_regressors,
                         run_grid, run_scenario)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
