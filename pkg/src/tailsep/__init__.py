"""Tests that tell apart classes of distribution tails using a separating cdf."""
from .distributions import DistributionSpec, SeedBundle, sample, sample_top
from .errors import (ConvergenceError, InvalidParameters, SupportError, TailsepError,
                     TiedThresholdError)
from .separators import (SeparatorCdf, check_B_condition, check_C_delta, check_prop1,
                         logweibull_vs_rv, make_separator, weibull_vs_logweibull)
from .tail_tests import (SortedSample, TestOutcome, compute_hat_R, compute_R, compute_tilde_R,
                         location_scale_free_test, scale_free_test, sigma2)

__version__ = "0.1.0"
