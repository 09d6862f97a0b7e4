"""Sparse generalized PCA for exponential-family data with missing values."""

from .accel import (
    AccelConfig,
    ScreenSchedule,
    fit_accelerated,
    fit_progressive,
    progressive_screen_step,
    screen_quota,
)
from .data import FactorModel, MaskedMatrix, grad_theta, gradients, masked_nll, read_csv, theta
from .family import DomainError, Family, get_family
from .metrics import EvalResult, evaluate, max_canonical_angle, selection_rates, trimmed_mean
from .multistart import MultiStartConfig, MultiStartError, multi_start_fit, random_init
from .sim import SimSpec, generate_data, generate_loadings, setting_spec
from .solver import ConfigError, FitReport, SolverConfig, fit, momentum_weight
from .threshold import SparsityLevel, quantile_threshold_elem, quantile_threshold_group

__version__ = "0.1.0"
