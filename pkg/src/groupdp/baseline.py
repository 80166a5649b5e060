"""The black-box comparison pipeline: RDP accounting plus generic conversions.

The conventional route to a group guarantee treats the mechanism as an
(alpha, tau)-RDP black box: round the group size m up to 2^c, read the RDP
curve at order alpha * 2^c, and scale tau by 3^c.  The 3^c ~ m^1.58 factor is
what the direct subsampled analysis avoids.

RDP curves used per mechanism: the tight subsampled-Gaussian formula for
Gaussian noise; for Laplace/Skellam/RR the m=1 instantiation of this
package's own subsampled bound (a valid subsampled RDP bound), so the
comparison isolates the conversion step.
"""
from __future__ import annotations

import math
from dataclasses import replace
from typing import Callable

import numpy as np

from .accountant import AccountingQuery, GpGuarantee, RgpGuarantee, single_round_tau
from .mechanisms import Gaussian, MechanismSpec
from .numerics import log_binomial_row, log_one_minus_exp, log_sum_exp


def _require_integer_order(alpha: float) -> int:
    if alpha != int(alpha) or alpha < 2:
        raise ValueError(f"this formula requires an integer order >= 2, got {alpha}")
    return int(alpha)


def subsampled_gaussian_rdp(alpha: float, q: float, sigma: float) -> float:
    """Tight RDP of the Poisson-subsampled Gaussian mechanism at integer order.

    (1/(a-1)) log sum_{i=0}^{a} C(a,i) (1-q)^(a-i) q^i exp((i^2 - i)/(2 sigma^2)),
    evaluated in log space.  The binomial expansion is exact only at integer
    orders, so non-integer alpha is a usage error.
    """
    a = _require_integer_order(alpha)
    if not (0.0 <= q < 1.0):
        raise ValueError(f"sampling rate must lie in [0, 1), got {q}")
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if q == 0.0:
        return 0.0  # never sampled: identical output distributions
    i = np.arange(a + 1)
    log_terms = (
        log_binomial_row(a)
        + (a - i) * math.log1p(-q)
        + i * math.log(q)
        + (i * i - i) / (2.0 * sigma * sigma)
    )
    return max(0.0, log_sum_exp(log_terms) / (a - 1.0))


def rdp_to_rgp(
    m_target: int,
    alpha_target: float,
    rdp_curve: Callable[[float], float],
) -> RgpGuarantee:
    """Black-box conversion of an RDP curve to a group guarantee.

    Rounds m_target up to 2^c, reads the curve at order alpha_target * 2^c and
    scales tau by 3^c.  Requires alpha_target >= 2 (equivalently, the source
    order must be at least 2^(c+1)).  The returned guarantee is stated at the
    rounded group size 2^c >= m_target.
    """
    if m_target < 1 or m_target != int(m_target):
        raise ValueError(f"group size must be a positive integer, got {m_target}")
    if not alpha_target >= 2:
        raise ValueError(
            f"the conversion is inapplicable below order 2, got alpha={alpha_target}"
        )
    c = (int(m_target) - 1).bit_length()  # ceil(log2 m), with m=1 -> 0
    order = alpha_target * 2**c
    tau = (3.0**c) * float(rdp_curve(order))
    return RgpGuarantee(m=2**c, alpha=alpha_target, tau=tau)


def basic_dp_to_gp(epsilon_prime: float, delta_prime: float, m: int) -> GpGuarantee:
    """The elementary (eps', delta')-DP to (m, m*eps', ...) group conversion.

    delta scales by (e^(m eps') - 1)/(e^(eps') - 1), computed in log space so
    large m*eps' does not overflow intermediate terms.  The resulting delta
    can exceed 1 by design: the blow-up is the point of the comparison, and
    the value is returned as-is.
    """
    if not epsilon_prime > 0:
        raise ValueError(f"epsilon' must be positive, got {epsilon_prime}")
    if not (0.0 < delta_prime < 1.0):
        raise ValueError(f"delta' must lie strictly in (0, 1), got {delta_prime}")
    if m < 1 or m != int(m):
        raise ValueError(f"group size must be a positive integer, got {m}")
    m_eps = m * epsilon_prime
    # log(e^x - 1) = x + log(1 - e^-x) for x > 0
    log_ratio = (m_eps + log_one_minus_exp(-m_eps)) - (
        epsilon_prime + log_one_minus_exp(-epsilon_prime)
    )
    log_delta = math.log(delta_prime) + log_ratio
    delta = math.exp(log_delta) if log_delta < 709 else math.inf
    return GpGuarantee(m=int(m), epsilon=m_eps, delta=delta)


def _rdp_curve(mechanism: MechanismSpec, q: float) -> Callable[[float], float]:
    """Single-iteration subsampled RDP curve for one mechanism."""
    if isinstance(mechanism, Gaussian):
        return lambda order: subsampled_gaussian_rdp(order, q, mechanism.sigma)
    return lambda order: single_round_tau(mechanism, 1, order, q)


def baseline_round_tau(mechanism: MechanismSpec, m: int, alpha: float, q: float) -> float:
    """Single-iteration baseline bound at group size m (conversion included)."""
    _require_integer_order(alpha)
    return rdp_to_rgp(m, float(alpha), _rdp_curve(mechanism, q)).tau


def baseline_rgp(query: AccountingQuery, alpha: float) -> RgpGuarantee:
    """Baseline group guarantee: RDP curve, composed over T, then converted.

    Composition happens at the RDP level before the conversion; the conversion
    is linear in tau so the order does not change the value, it is fixed for
    determinism.  The returned group size is the query's m rounded up to the
    next power of two.
    """
    _require_integer_order(alpha)
    curve = _rdp_curve(query.mechanism, query.q)
    composed = lambda order: query.iterations * curve(order)  # noqa: E731
    return rdp_to_rgp(query.m, float(alpha), composed)


def effective_group_size(m: int) -> int:
    """The group size the baseline actually certifies: m rounded up to 2^c."""
    if m < 1 or m != int(m):
        raise ValueError(f"group size must be a positive integer, got {m}")
    return 2 ** ((int(m) - 1).bit_length())
