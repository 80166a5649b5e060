"""Subsampled group-privacy accounting.

The central object is the subsampled combinator: if the base mechanism
satisfies a (k, alpha, tau_star_k)-guarantee for every k in {0..m}, then the
Poisson-subsampled mechanism with rate q satisfies (m, alpha, tau_m) with

    tau_m(alpha) = (1/(alpha-1)) * log( sum_k C(m,k) (1-q)^(m-k) q^k
                                        * exp((alpha-1) tau_star_k(alpha)) ).

Feeding in the per-mechanism bounds from `mechanisms` yields closed-form
subsampled group guarantees; sequential composition is additive in tau, and
the divergence guarantee converts to an (m, epsilon, delta) one.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .mechanisms import (
    MechanismSpec,
    RandomizedResponse,
    group_tau,
    rr_group_tau,
)
from .numerics import log_binomial_row, log_one_minus_exp, log_sum_exp

# Orders 2..100, the range production accountants typically scan.  Integral
# by default because the baseline comparison needs integer orders.
DEFAULT_ALPHA_GRID: tuple[int, ...] = tuple(range(2, 101))

_NEIGHBORING_MODES = ("unbounded", "bounded")


@dataclass(frozen=True)
class RgpGuarantee:
    """(m, alpha, tau): order-alpha Renyi divergence bound tau at group size m."""

    m: int
    alpha: float
    tau: float

    def __post_init__(self):
        if self.m < 1 or self.m != int(self.m):
            raise ValueError(f"group size must be a positive integer, got {self.m}")
        if not self.alpha > 1:
            raise ValueError(f"Renyi order must exceed 1, got {self.alpha}")
        if math.isnan(self.tau) or self.tau < 0:
            raise ValueError(f"divergence bound must be nonnegative, got {self.tau}")


@dataclass(frozen=True)
class GpGuarantee:
    """(m, epsilon, delta) group privacy in the classical sense.

    delta is validated where guarantees originate (conversion entry points);
    the type itself stays permissive so the basic DP-to-GP rule can return its
    blown-up delta as-is for inspection.
    """

    m: int
    epsilon: float
    delta: float

    def __post_init__(self):
        if self.m < 1 or self.m != int(self.m):
            raise ValueError(f"group size must be a positive integer, got {self.m}")
        if math.isnan(self.epsilon):
            raise ValueError("epsilon must not be NaN")
        if math.isnan(self.delta) or self.delta <= 0:
            raise ValueError(f"delta must be positive, got {self.delta}")


@dataclass(frozen=True)
class AccountingQuery:
    """One accounting request: mechanism, sampling, iterations and targets."""

    mechanism: MechanismSpec
    q: float
    iterations: int
    m: int
    alpha_grid: tuple[float, ...] = DEFAULT_ALPHA_GRID
    delta: float = 1e-5
    neighboring: str = "unbounded"  # documentation only; bounds are identical

    def __post_init__(self):
        if not (0.0 < self.q < 1.0):
            raise ValueError(f"sampling rate must lie strictly in (0, 1), got {self.q}")
        if self.iterations < 1 or self.iterations != int(self.iterations):
            raise ValueError(f"iterations must be a positive integer, got {self.iterations}")
        if self.m < 1 or self.m != int(self.m):
            raise ValueError(f"group size must be a positive integer, got {self.m}")
        if len(self.alpha_grid) == 0:
            raise ValueError("alpha_grid must be non-empty")
        if any(a <= 1 for a in self.alpha_grid):
            raise ValueError("all orders in alpha_grid must exceed 1")
        if any(b <= a for a, b in zip(self.alpha_grid, self.alpha_grid[1:])):
            raise ValueError("alpha_grid must be strictly increasing")
        if not (0.0 < self.delta < 1.0):
            raise ValueError(f"delta must lie strictly in (0, 1), got {self.delta}")
        if self.neighboring not in _NEIGHBORING_MODES:
            raise ValueError(f"neighboring must be one of {_NEIGHBORING_MODES}")


def subsampled_rgp_bound(
    m: int,
    alpha: float,
    q: float,
    tau_star: Callable[[int], float],
) -> float:
    """Mix per-group-size bounds through the binomial subsampling weights.

    Args:
      m: group size of the subsampled guarantee.
      alpha: Renyi order (> 1).
      q: Poisson sampling rate in (0, 1).
      tau_star: map from k in {0..m} to the base mechanism's group-k bound.
        tau_star(0) should be 0; a nonzero value is legal but almost always a
        bug, so it warns.

    Returns:
      tau_m(alpha), computed fully in log space.  The result is clamped at 0
      and never exceeds max_k tau_star(k).
    """
    if m < 1 or m != int(m):
        raise ValueError(f"group size must be a positive integer, got {m}")
    if not alpha > 1:
        raise ValueError(f"Renyi order must exceed 1, got {alpha}")
    if not (0.0 < q < 1.0):
        raise ValueError(f"sampling rate must lie strictly in (0, 1), got {q}")
    m = int(m)
    taus = np.array([float(tau_star(k)) for k in range(m + 1)])
    if not np.isfinite(taus).all():
        raise ValueError("tau_star must be finite on {0..m}")
    if taus[0] != 0.0:
        warnings.warn(
            f"tau_star(0) = {taus[0]} is nonzero; the empty-difference bound "
            "should normally vanish",
            stacklevel=2,
        )
    k = np.arange(m + 1)
    log_terms = (
        log_binomial_row(m)
        + (m - k) * math.log1p(-q)
        + k * math.log(q)
        + (alpha - 1.0) * taus
    )
    return max(0.0, log_sum_exp(log_terms) / (alpha - 1.0))


def single_round_tau(mechanism: MechanismSpec, m: int, alpha: float, q: float) -> float:
    """One iteration's subsampled bound tau_m(alpha) for the given mechanism.

    Randomized response uses its collapsed two-term form: the k >= 1 bounds
    coincide, so the binomial sum reduces to
    (1/(a-1)) log((1-q)^m + (1 - (1-q)^m) * Phi_RR(alpha)).
    """
    if isinstance(mechanism, RandomizedResponse):
        if m < 1 or m != int(m):
            raise ValueError(f"group size must be a positive integer, got {m}")
        if not (0.0 < q < 1.0):
            raise ValueError(f"sampling rate must lie strictly in (0, 1), got {q}")
        log_none = m * math.log1p(-q)  # log (1-q)^m
        log_some = log_one_minus_exp(log_none)
        log_phi = (alpha - 1.0) * rr_group_tau(alpha, mechanism.p)
        return max(0.0, float(np.logaddexp(log_none, log_some + log_phi)) / (alpha - 1.0))
    return subsampled_rgp_bound(m, alpha, q, lambda k: group_tau(mechanism, k, alpha))


def account_mechanism(query: AccountingQuery, alpha: float) -> RgpGuarantee:
    """The single-iteration guarantee of the query's mechanism at order alpha."""
    tau = single_round_tau(query.mechanism, query.m, alpha, query.q)
    return RgpGuarantee(m=query.m, alpha=alpha, tau=tau)


def compose(tau_single: float, iterations: int) -> float:
    """Sequential composition: iterations add divergence at fixed (m, alpha)."""
    if iterations < 1 or iterations != int(iterations):
        raise ValueError(f"iterations must be a positive integer, got {iterations}")
    if math.isnan(tau_single) or tau_single < 0:
        raise ValueError(f"tau must be nonnegative, got {tau_single}")
    return float(iterations) * tau_single


def rgp_to_gp(guarantee: RgpGuarantee, delta: float) -> GpGuarantee:
    """Convert an (m, alpha, tau) guarantee to (m, epsilon, delta).

    epsilon = tau + (log(1/delta) + (alpha-1) log(1 - 1/alpha) - log alpha)
              / (alpha - 1).
    """
    if not (0.0 < delta < 1.0):
        raise ValueError(f"delta must lie strictly in (0, 1), got {delta}")
    a = float(guarantee.alpha)
    epsilon = guarantee.tau + (
        math.log(1.0 / delta) + (a - 1.0) * math.log1p(-1.0 / a) - math.log(a)
    ) / (a - 1.0)
    return GpGuarantee(m=guarantee.m, epsilon=epsilon, delta=delta)


def best_gp(query: AccountingQuery) -> tuple[GpGuarantee, float]:
    """Smallest epsilon over the query's alpha grid, after composing over T.

    Returns the winning guarantee and the order that achieved it; exact ties
    go to the smaller order for reproducibility.
    """
    best: tuple[GpGuarantee, float] | None = None
    for alpha in query.alpha_grid:
        tau = compose(account_mechanism(query, alpha).tau, query.iterations)
        gp = rgp_to_gp(RgpGuarantee(query.m, alpha, tau), query.delta)
        if best is None or gp.epsilon < best[0].epsilon:
            best = (gp, float(alpha))
    assert best is not None  # alpha_grid is validated non-empty
    return best
