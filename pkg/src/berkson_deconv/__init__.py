"""Kernel density deconvolution under Berkson error.

Observations Y = X + xi are deconvolved towards W = X + sigma * eta. The package
provides the spectral models, the direct and sinc-kernel estimators, the
eight-case risk bounds, the optimal-bandwidth oracle and a Monte Carlo harness.
"""

from .bandwidth import BandwidthDecision, Branch, grid_search_bandwidth, mu1, mu2, optimal_bandwidth
from .errors import (AdmissibilityError, ConfigError, DeconvError, GridError, InvalidScenario,
                     NumericError, RegimeError, TruncationError)
from .estimator import DensityEstimate, GridSpec, ecf, estimate, ise, true_fw
from .montecarlo import MiseEstimate, RateFit, fit_rate, mc_mise, rate_study, sample_y
from .risk import (CaseId, bias_bound, classify_case, exp_root_asymptotic, laplace_approx,
                   phi_profile, risk_bound, solve_exp_eq, variance_bound)
from .spectral import (CharacteristicModel, Family, Scenario, SmoothnessEnvelope, SobolevSpec,
                       cf_eval, rho_finiteness, rho_squared, sobolev_norm_sq)

__version__ = "0.1.0"
