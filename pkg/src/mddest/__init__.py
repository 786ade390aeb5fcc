"""Estimation of conditional moment models E[h(Z, theta) | X] = 0 by minimising the
martingale difference divergence (MDD) between the residuals and X."""
from .core import (EstimateResult, FunctionModel, IdentificationError, NonFiniteResidualError,
                   ResidualModel, Sample, SampleError, check_jacobian, finite_difference_jacobian,
                   validate_sample)
from .dgp import DgpSpec, SimulatedData, generate, replication_seed
from .dl import dl_indicator, dl_objective, dl_value_and_gradient
from .estimators import (OptimizerConfig, closed_form_linear, estimate, estimate_dl, estimate_mdd,
                         estimate_two_step, linear_mdd_solution)
from .inference import SandwichParts, intercepts_from_m, u_hat, vcov_dl, vcov_theorem2, vcov_theorem3
from .mdd import (char_process, distance_matrix, icm_objective, mdd_gradient, mdd_objective,
                  mdd_statistic, mdd_value_and_gradient, mdd_via_quadrature, weight_constant)
from .models import (IndexModel, LinearModel, TarModel, ar_model, builtin_model, embed, var_model)
from .montecarlo import McSummary, emit_table, parse_table_csv, run_experiment

__version__ = "0.1.0"

_modules = {"cli", "core", "dgp", "dl", "estimators", "inference", "mdd", "models", "montecarlo", "optimize"}
__all__ = sorted(n for n in dir() if not n.startswith("_") and n not in _modules)
