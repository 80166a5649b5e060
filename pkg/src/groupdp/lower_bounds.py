"""Analytical lower bounds: exact divergence on a worst-case dataset pair.

The construction appends m unit records to an all-zeros dataset and releases
a noisy sum, so the subsampled mechanism's two output laws are the base noise
law and its binomial mixture over shifts 0..m:

    M(D) ~ mu_0,   M(D') ~ sum_k C(m,k) (1-q)^(m-k) q^k * mu_k.

Any valid (m, alpha, tau)-guarantee must dominate D_alpha(M(D') || M(D)),
which is a one-dimensional integral (or lattice sum) evaluated here to
certify how tight the closed-form upper bounds are.

Sensitivity is fixed at 1 in this construction (unit records, sum query), so
the Skellam bound is evaluated at sensitivity_c = 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .mechanisms import (
    Gaussian,
    Laplace,
    MechanismSpec,
    RandomizedResponse,
    Skellam,
)
from .numerics import (
    NumericalFailure,
    integrate_real_line,
    log_bessel_i_row,
    log_binomial_row,
)

# Evaluation points are processed in blocks to keep the (points x components)
# mixture matrices comfortably in memory at m = 256.
_BLOCK = 4096

# Lattice truncation: tail mass beyond the chosen radius must be below this.
_TAIL_MASS = 1e-13


@dataclass(frozen=True)
class MixtureSpec:
    """The worst-case pair: base noise law vs. its shifted binomial mixture."""

    log_weights: np.ndarray  # log of C(m,k)(1-q)^(m-k) q^k, k = 0..m
    shifts: np.ndarray  # per-component location shift, k = 0..m
    base: MechanismSpec

    def __post_init__(self):
        total = float(np.exp(self.log_weights).sum())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"mixture weights must sum to 1, got {total}")


def worst_case_mixture(base: MechanismSpec, m: int, q: float) -> MixtureSpec:
    if m < 1 or m != int(m):
        raise ValueError(f"group size must be a positive integer, got {m}")
    if not (0.0 < q < 1.0):
        raise ValueError(f"sampling rate must lie strictly in (0, 1), got {q}")
    m = int(m)
    k = np.arange(m + 1)
    log_w = log_binomial_row(m) + (m - k) * math.log1p(-q) + k * math.log(q)
    return MixtureSpec(log_weights=log_w, shifts=k.astype(float), base=base)


def _check_order(alpha: float) -> float:
    alpha = float(alpha)
    if not (math.isfinite(alpha) and alpha > 1):
        raise ValueError(f"Renyi order must be a finite real > 1, got {alpha}")
    return alpha


def _mixture_integrand(mix: MixtureSpec, alpha: float, log_density):
    """log of mu_0(z)^(1-alpha) * (sum_k p_k mu_k(z))^alpha, vectorized in z."""
    log_w = mix.log_weights[None, :]
    shifts = mix.shifts[None, :]

    def log_f(z):
        out = np.empty_like(z)
        for i in range(0, len(z), _BLOCK):
            zz = z[i : i + _BLOCK]
            log_mix = logsumexp(log_w + log_density(zz[:, None] - shifts), axis=1)
            out[i : i + _BLOCK] = (1.0 - alpha) * log_density(zz) + alpha * log_mix
        return out

    return log_f


def gaussian_lower_bound(m: int, alpha: float, q: float, sigma: float) -> float:
    """Exact divergence for the subsampled Gaussian worst case.

    The integrand's rightmost bump sits near z = alpha * m (the density-ratio
    tilt pushes it past the largest shift), so the window spans
    [-40 sigma, alpha*m + 40 sigma].
    """
    alpha = _check_order(alpha)
    mix = worst_case_mixture(Gaussian(sigma), m, q)
    log_norm = math.log(sigma) + 0.5 * math.log(2.0 * math.pi)

    def log_density(d):
        return -0.5 * (d / sigma) ** 2 - log_norm

    lo = -40.0 * sigma
    hi = alpha * m + 40.0 * sigma
    log_integral = integrate_real_line(
        _mixture_integrand(mix, alpha, log_density),
        center=0.5 * (lo + hi),
        spread=(hi - lo) / 80.0,
    )
    return max(0.0, log_integral / (alpha - 1.0))


def laplace_lower_bound(m: int, alpha: float, q: float, b: float) -> float:
    """Exact divergence for the subsampled Laplace worst case.

    Every mixture component has a density kink at its integer shift, so the
    integration domain is split at 0..m.  Past the last shift the integrand
    decays like exp(-z/b) for every order, so the spec window suffices.
    """
    alpha = _check_order(alpha)
    mix = worst_case_mixture(Laplace(b), m, q)
    log_norm = math.log(2.0 * b)

    def log_density(d):
        return -np.abs(d) / b - log_norm

    lo = -40.0 * b
    hi = m + 40.0 * b
    log_integral = integrate_real_line(
        _mixture_integrand(mix, alpha, log_density),
        center=0.5 * (lo + hi),
        spread=(hi - lo) / 80.0,
        breakpoints=range(m + 1),
    )
    return max(0.0, log_integral / (alpha - 1.0))


def _skellam_tail_radius(mu: float, tol: float) -> int:
    """Radius t with P(|Sk(0, mu)| >= t) below tol, via the Chernoff bound.

    The symmetric law has mgf exp(mu (cosh s - 1)); optimizing s = asinh(t/mu)
    gives tail <= exp(mu (sqrt(1 + (t/mu)^2) - 1) - t asinh(t/mu)).
    """
    log_tol = math.log(0.5 * tol)  # two-sided
    t = max(8.0, math.sqrt(mu))
    while t < 1e12:
        s = math.asinh(t / mu)
        if mu * (math.cosh(s) - 1.0) - s * t <= log_tol:
            return int(math.ceil(t))
        t *= 2.0
    raise NumericalFailure(f"no usable truncation radius for mu={mu}")


def skellam_lower_bound(m: int, alpha: float, q: float, mu: float) -> float:
    """Exact divergence for the subsampled Skellam worst case (sensitivity 1).

    pmf(n) = exp(-mu) I_|n|(mu): the symmetric law with variance mu, i.e. the
    difference of two Poisson(mu/2) components.  The lattice sum runs over
    z in [-R, ceil(alpha*m) + R] with R chosen so the omitted tails are below
    1e-12 of the total; the window widens once if the edge terms are not yet
    negligible.
    """
    alpha = _check_order(alpha)
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu}")
    mix = worst_case_mixture(Skellam(mu, sensitivity_c=1), m, q)
    radius = _skellam_tail_radius(mu, _TAIL_MASS) + 64

    for _ in range(4):
        z_lo = -radius
        z_hi = int(math.ceil(alpha * m)) + radius
        z = np.arange(z_lo, z_hi + 1)
        max_order = max(abs(z_lo) + m, z_hi)
        log_pmf_table = -mu + log_bessel_i_row(max_order, mu)

        terms = np.empty(len(z))
        log_w = mix.log_weights[None, :]
        shifts = np.arange(m + 1)
        for i in range(0, len(z), _BLOCK):
            zz = z[i : i + _BLOCK]
            log_mix = logsumexp(
                log_w + log_pmf_table[np.abs(zz[:, None] - shifts[None, :])], axis=1
            )
            terms[i : i + _BLOCK] = (1.0 - alpha) * log_pmf_table[np.abs(zz)] + alpha * log_mix
        total = float(logsumexp(terms))
        edge = max(terms[0], terms[-1])
        if edge <= total + math.log(1e-12):
            return max(0.0, total / (alpha - 1.0))
        radius *= 2  # edges still contribute: widen and retry
    raise NumericalFailure(
        "lattice truncation did not reach the target tail mass",
        last_estimate=total / (alpha - 1.0),
    )


def rr_lower_bound(m: int, alpha: float, q: float, p: float) -> float:
    """Exact divergence for subsampled randomized response.

    The released bit answers "is the sampled subset all-zeros", so the output
    space has two points and the expectation is an exact two-term sum with
    mixing weight w = (1-q)^m on the unflipped law.
    """
    alpha = _check_order(alpha)
    if m < 1 or m != int(m):
        raise ValueError(f"group size must be a positive integer, got {m}")
    if not (0.0 < q < 1.0):
        raise ValueError(f"sampling rate must lie strictly in (0, 1), got {q}")
    if not (0.5 < p < 1.0):
        raise ValueError(f"p must lie strictly in (0.5, 1), got {p}")
    w = (1.0 - q) ** m
    total = 0.0
    for mu0, mu1 in ((p, 1.0 - p), (1.0 - p, p)):
        total += mu0 ** (1.0 - alpha) * (w * mu0 + (1.0 - w) * mu1) ** alpha
    return max(0.0, math.log(total) / (alpha - 1.0))


def lower_bound(mechanism: MechanismSpec, m: int, alpha: float, q: float) -> float:
    """Dispatch the worst-case divergence for one subsampled iteration."""
    if isinstance(mechanism, Gaussian):
        return gaussian_lower_bound(m, alpha, q, mechanism.sigma)
    if isinstance(mechanism, Laplace):
        return laplace_lower_bound(m, alpha, q, mechanism.b)
    if isinstance(mechanism, Skellam):
        return skellam_lower_bound(m, alpha, q, mechanism.mu)
    if isinstance(mechanism, RandomizedResponse):
        return rr_lower_bound(m, alpha, q, mechanism.p)
    raise TypeError(f"unknown mechanism type: {type(mechanism).__name__}")
