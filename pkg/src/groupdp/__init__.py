"""Tight Renyi group-privacy accounting for subsampled mechanisms.

The package computes (m, alpha, tau) group guarantees for Poisson-subsampled
Gaussian, Laplace, Skellam and randomized-response mechanisms, compares them
against the black-box RDP-to-group conversion and against analytical lower
bounds, and calibrates the minimum noise meeting a target guarantee.
"""
from .accountant import (
    DEFAULT_ALPHA_GRID,
    AccountingQuery,
    GpGuarantee,
    RgpGuarantee,
    account_mechanism,
    best_gp,
    compose,
    rgp_to_gp,
    single_round_tau,
    subsampled_rgp_bound,
)
from .baseline import (
    baseline_rgp,
    baseline_round_tau,
    basic_dp_to_gp,
    effective_group_size,
    rdp_to_rgp,
    subsampled_gaussian_rdp,
)
from .calibration import ACCOUNTANTS, CalibrationInfeasible, calibrate
from .lower_bounds import (
    gaussian_lower_bound,
    laplace_lower_bound,
    lower_bound,
    rr_lower_bound,
    skellam_lower_bound,
)
from .mechanisms import (
    Gaussian,
    Laplace,
    MechanismSpec,
    RandomizedResponse,
    Skellam,
    gaussian_group_tau,
    group_tau,
    laplace_group_tau,
    make_mechanism,
    rr_group_tau,
    skellam_group_tau,
)
from .numerics import (
    LOG_ZERO,
    NumericalFailure,
    integrate_real_line,
    log_bessel_i,
    log_binomial,
    log_sum_exp,
)

__version__ = "0.1.0"

__all__ = [
    "ACCOUNTANTS",
    "AccountingQuery",
    "CalibrationInfeasible",
    "DEFAULT_ALPHA_GRID",
    "Gaussian",
    "GpGuarantee",
    "LOG_ZERO",
    "Laplace",
    "MechanismSpec",
    "NumericalFailure",
    "RandomizedResponse",
    "RgpGuarantee",
    "Skellam",
    "account_mechanism",
    "baseline_rgp",
    "baseline_round_tau",
    "basic_dp_to_gp",
    "best_gp",
    "calibrate",
    "compose",
    "effective_group_size",
    "gaussian_group_tau",
    "gaussian_lower_bound",
    "group_tau",
    "integrate_real_line",
    "laplace_group_tau",
    "laplace_lower_bound",
    "log_bessel_i",
    "log_binomial",
    "log_sum_exp",
    "lower_bound",
    "make_mechanism",
    "rdp_to_rgp",
    "rgp_to_gp",
    "rr_group_tau",
    "rr_lower_bound",
    "single_round_tau",
    "skellam_group_tau",
    "skellam_lower_bound",
    "subsampled_gaussian_rdp",
    "subsampled_rgp_bound",
]
