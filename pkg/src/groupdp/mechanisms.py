"""Mechanism parameterizations and their per-group-size divergence bounds.

Each mechanism exposes tau_star_k(alpha): the order-alpha Renyi divergence
bound between outputs on datasets differing in k records, before any
subsampling.  These are the per-k ingredients the subsampled combinator mixes
with binomial weights.

Conventions:
  * Gaussian noise std is C*sigma and Laplace scale is C*b for sensitivity C;
    C cancels in both bounds, so only the multiplier is stored.
  * Skellam keeps the integer sensitivity explicit (it does not cancel).  The
    variance parameter follows the convention in which Sk(0, mu) has variance
    mu, i.e. the difference of two Poisson(mu/2) variables.
  * Randomized response reports the truth w.p. p in (0.5, 1); its bound is
    independent of the group size for k >= 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def _require_order(alpha: float) -> float:
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha <= 1.0:
        raise ValueError(f"Renyi order must be a finite real > 1, got {alpha}")
    return alpha


def _require_group_size(k: int) -> int:
    if k != int(k) or k < 0:
        raise ValueError(f"group size must be a nonnegative integer, got {k}")
    return int(k)


@dataclass(frozen=True)
class Gaussian:
    """Additive spherical Gaussian noise with multiplier sigma > 0."""

    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"Gaussian requires sigma > 0, got {self.sigma}")


@dataclass(frozen=True)
class Laplace:
    """Additive per-coordinate Laplace noise with scale multiplier b > 0."""

    b: float

    def __post_init__(self):
        if not (math.isfinite(self.b) and self.b > 0):
            raise ValueError(f"Laplace requires b > 0, got {self.b}")


@dataclass(frozen=True)
class Skellam:
    """Additive symmetric Skellam noise, variance parameter mu per unit sensitivity."""

    mu: float
    sensitivity_c: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.mu) and self.mu > 0):
            raise ValueError(f"Skellam requires mu > 0, got {self.mu}")
        if self.sensitivity_c != int(self.sensitivity_c) or self.sensitivity_c < 1:
            raise ValueError(
                f"Skellam requires integer sensitivity_c >= 1, got {self.sensitivity_c}"
            )


@dataclass(frozen=True)
class RandomizedResponse:
    """Binary randomized response reporting the truth with probability p."""

    p: float

    def __post_init__(self):
        # p = 0.5 (tau = 0) and p = 1 (tau = inf) are degenerate and rejected
        # rather than clamped.
        if not (0.5 < self.p < 1.0):
            raise ValueError(f"RandomizedResponse requires 0.5 < p < 1, got {self.p}")


MechanismSpec = Gaussian | Laplace | Skellam | RandomizedResponse

_FAMILIES = {
    "gaussian": Gaussian,
    "laplace": Laplace,
    "skellam": Skellam,
    "rr": RandomizedResponse,
}


def family_name(mechanism: MechanismSpec) -> str:
    for name, cls in _FAMILIES.items():
        if isinstance(mechanism, cls):
            return name
    raise TypeError(f"unknown mechanism type: {type(mechanism).__name__}")


def make_mechanism(family: str, noise: float, sensitivity_c: int = 1) -> MechanismSpec:
    """Build a mechanism of the named family with the given noise parameter."""
    if family not in _FAMILIES:
        raise ValueError(f"unknown mechanism family {family!r}; expected one of {sorted(_FAMILIES)}")
    if family == "skellam":
        return Skellam(mu=noise, sensitivity_c=sensitivity_c)
    if family == "rr":
        return RandomizedResponse(p=noise)
    return _FAMILIES[family](noise)


def noise_value(mechanism: MechanismSpec) -> float:
    """The mechanism's calibratable noise parameter (sigma, b, mu or p)."""
    if isinstance(mechanism, Gaussian):
        return mechanism.sigma
    if isinstance(mechanism, Laplace):
        return mechanism.b
    if isinstance(mechanism, Skellam):
        return mechanism.mu
    return mechanism.p


def gaussian_group_tau(k: int, alpha: float, sigma: float) -> float:
    """alpha * k^2 / (2 sigma^2): the Gaussian bound at shift norm k*C."""
    k = _require_group_size(k)
    alpha = _require_order(alpha)
    if not sigma > 0:
        raise ValueError(f"gaussian_group_tau requires sigma > 0, got {sigma}")
    return alpha * k * k / (2.0 * sigma * sigma)


def laplace_group_tau(k: int, alpha: float, b: float) -> float:
    """Laplace bound: log of the two-exponential kernel, evaluated in log space.

    The kernel is alpha/(2a-1) * e^((a-1)k/b) + (a-1)/(2a-1) * e^(-a k/b);
    the worst k-record shift concentrates on a single coordinate, so the
    multi-dimensional case reduces to this one-dimensional expression.
    """
    k = _require_group_size(k)
    alpha = _require_order(alpha)
    if not b > 0:
        raise ValueError(f"laplace_group_tau requires b > 0, got {b}")
    if k == 0:
        return 0.0
    hi = math.log(alpha / (2.0 * alpha - 1.0)) + (alpha - 1.0) * k / b
    lo = math.log((alpha - 1.0) / (2.0 * alpha - 1.0)) - alpha * k / b
    return float(np.logaddexp(hi, lo)) / (alpha - 1.0)


def skellam_group_tau(k: int, alpha: float, mu: float, sensitivity_c: int = 1) -> float:
    """Skellam bound: alpha k^2/(2 mu) plus the smaller of two correction branches."""
    k = _require_group_size(k)
    alpha = _require_order(alpha)
    if not mu > 0:
        raise ValueError(f"skellam_group_tau requires mu > 0, got {mu}")
    c = int(sensitivity_c)
    if c < 1:
        raise ValueError(f"skellam_group_tau requires sensitivity_c >= 1, got {sensitivity_c}")
    lead = alpha * k * k / (2.0 * mu)
    branch_a = ((2.0 * alpha - 1.0) * k * k * c + 6.0 * k) / (4.0 * c**3 * mu * mu)
    branch_b = 3.0 * k / (2.0 * c * mu)
    return lead + min(branch_a, branch_b)


def rr_group_tau(alpha: float, p: float) -> float:
    """Randomized-response bound at any group size k >= 1.

    (1/(a-1)) log(p^a/(1-p)^(a-1) + (1-p)^a/p^(a-1)); the local guarantee
    makes this independent of k, and k = 0 gives 0.
    """
    alpha = _require_order(alpha)
    if not (0.5 < p < 1.0):
        raise ValueError(f"rr_group_tau requires 0.5 < p < 1, got {p}")
    log_p = math.log(p)
    log_1p = math.log1p(-p)
    hi = alpha * log_p - (alpha - 1.0) * log_1p
    lo = alpha * log_1p - (alpha - 1.0) * log_p
    return float(np.logaddexp(hi, lo)) / (alpha - 1.0)


def group_tau(mechanism: MechanismSpec, k: int, alpha: float) -> float:
    """Dispatch tau_star_k(alpha) for the given mechanism."""
    if isinstance(mechanism, Gaussian):
        return gaussian_group_tau(k, alpha, mechanism.sigma)
    if isinstance(mechanism, Laplace):
        return laplace_group_tau(k, alpha, mechanism.b)
    if isinstance(mechanism, Skellam):
        return skellam_group_tau(k, alpha, mechanism.mu, mechanism.sensitivity_c)
    if isinstance(mechanism, RandomizedResponse):
        return 0.0 if _require_group_size(k) == 0 else rr_group_tau(alpha, mechanism.p)
    raise TypeError(f"unknown mechanism type: {type(mechanism).__name__}")
