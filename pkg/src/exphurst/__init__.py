"""Hurst exponent estimation from discrete variations with sample expectiles."""
from .contamination import ContaminationSpec, add_outliers, round_increments, round_path
from .estimators import (EstimatorConfig, HurstEstimate, ScaleDegenerateError, design_vector,
                         estimate_hurst, estimate_sigma2)
from .expectile import (Transform, sample_expectile, sample_median, sample_quantile,
                        theoretical_expectile, trimmed_mean)
from .filters import FilterSpec, apply_filter, dilate, filtered_autocovariance, kappa, make_filter
from .pselect import PSelectConfig, select_p
from .synth import (HurstParams, SamplePath, fgn_autocovariance, mix_seed, simulate_fbm,
                    simulate_fgn)

__version__ = "0.1.0"
