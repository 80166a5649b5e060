"""Numerically stable scalar kernels shared by all accounting code.

Everything that touches probability weights runs in log space: the binomial
sums behind the subsampled bounds produce exp arguments in the thousands at
the orders the baseline conversion needs, and they overflow immediately in
linear space.
"""
from __future__ import annotations

import math
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.special import gammaln, ive, roots_legendre
from scipy.special import logsumexp as _np_logsumexp

# A LogWeight is the natural log of a nonnegative quantity; LOG_ZERO is the
# sentinel for log(0) and is absorbed exactly by log_sum_exp.
LogWeight = float
LOG_ZERO = float("-inf")

# Quadrature window, in units of the distribution's spread.  Gaussian and
# Laplace tails beyond 40 spreads are below 1e-300.
WINDOW_SPREADS = 40.0

# Bessel series truncation: stop once the next term falls below this fraction
# of the running sum (double-precision floor).
_BESSEL_REL_TOL = 1e-16

_GL_NODES, _GL_WEIGHTS = roots_legendre(32)


class NumericalFailure(RuntimeError):
    """An iterative numeric routine could not reach its target accuracy.

    Carries the last estimate (if any) so callers can report how far the
    refinement got before giving up.
    """

    def __init__(self, message: str, last_estimate: float | None = None):
        super().__init__(message)
        self.last_estimate = last_estimate


def log_sum_exp(terms: Iterable[LogWeight]) -> LogWeight:
    """log(sum_i exp(terms_i)) with the max-subtraction trick.

    LOG_ZERO entries are absorbed; an empty sequence is a usage error.
    """
    arr = np.asarray(list(terms) if not isinstance(terms, np.ndarray) else terms, dtype=float)
    if arr.size == 0:
        raise ValueError("log_sum_exp requires a non-empty sequence")
    hi = float(arr.max())
    if hi == LOG_ZERO or math.isnan(hi):
        return hi
    if math.isinf(hi):  # +inf dominates everything
        return hi
    return hi + math.log(float(np.exp(arr - hi).sum()))


def log_binomial(m: int, k: int) -> LogWeight:
    """log C(m, k) via log-gamma; relative error <= 1e-10 up to m ~ 1e6."""
    if m < 0 or k < 0:
        raise ValueError(f"log_binomial requires nonnegative arguments, got m={m}, k={k}")
    if k > m:
        raise ValueError(f"log_binomial requires k <= m, got m={m}, k={k}")
    return math.lgamma(m + 1) - math.lgamma(k + 1) - math.lgamma(m - k + 1)


def log_binomial_row(m: int) -> np.ndarray:
    """log C(m, k) for k = 0..m as a vector."""
    if m < 0:
        raise ValueError(f"log_binomial_row requires m >= 0, got {m}")
    k = np.arange(m + 1)
    return gammaln(m + 1) - gammaln(k + 1) - gammaln(m - k + 1)


def log_one_minus_exp(log_x: float) -> float:
    """log(1 - exp(log_x)) for log_x < 0, stable near both ends."""
    if log_x >= 0:
        raise ValueError(f"log_one_minus_exp requires a negative argument, got {log_x}")
    if log_x > -math.log(2):
        return math.log(-math.expm1(log_x))
    return math.log1p(-math.exp(log_x))


def log_bessel_i(order: int, x: float) -> LogWeight:
    """log I_order(x) for integer order >= 0 and x > 0.

    Sums the ascending series sum_j (x/2)^(2j+order) / (j! (j+order)!) in log
    space, truncating once the next term drops below 1e-16 of the running sum
    (checked past the series peak near j = (-order + sqrt(order^2 + x^2)) / 2).
    """
    if order < 0 or order != int(order):
        raise ValueError(f"log_bessel_i requires an integer order >= 0, got {order}")
    if not math.isfinite(x):
        raise ValueError(f"log_bessel_i requires finite x, got {x}")
    if x <= 0:
        raise ValueError(f"log_bessel_i requires x > 0, got {x}")
    order = int(order)
    log_half_x = math.log(0.5 * x)
    peak = 0.5 * (-order + math.hypot(order, x))
    total = LOG_ZERO
    j0, block = 0, 64
    while True:
        j = np.arange(j0, j0 + block, dtype=float)
        terms = (2.0 * j + order) * log_half_x - gammaln(j + 1.0) - gammaln(j + order + 1.0)
        total = float(np.logaddexp(total, _np_logsumexp(terms)))
        j0 += block
        if j0 > peak and terms[-1] < total + math.log(_BESSEL_REL_TOL):
            return total
        block = min(block * 2, 65536)


def log_bessel_i_row(max_order: int, x: float) -> np.ndarray:
    """log I_n(x) for n = 0..max_order.

    Fast path through the exponentially scaled Bessel function; entries that
    underflow there (order far above x) fall back to the reference series.
    """
    if max_order < 0:
        raise ValueError(f"log_bessel_i_row requires max_order >= 0, got {max_order}")
    if not math.isfinite(x) or x <= 0:
        raise ValueError(f"log_bessel_i_row requires finite x > 0, got {x}")
    n = np.arange(max_order + 1)
    with np.errstate(divide="ignore"):
        vals = np.log(ive(n, x)) + x
    for i in np.nonzero(~np.isfinite(vals))[0]:
        vals[i] = log_bessel_i(int(i), x)
    return vals


def integrate_real_line(
    log_integrand: Callable[[np.ndarray], np.ndarray],
    center: float,
    spread: float,
    breakpoints: Sequence[float] = (),
) -> LogWeight:
    """log of the integral of exp(log_integrand) over the real line.

    Integrates over [center - 40*spread, center + 40*spread] with composite
    32-point Gauss-Legendre panels, doubling the panel budget until two
    successive refinements agree to 1e-9 in log space (1e-8 relative target
    for the integral itself).  `log_integrand` is called with numpy arrays of
    evaluation points and must return log-density values elementwise.

    `breakpoints` lists interior locations where the integrand is not smooth
    (e.g. Laplace kinks); panel edges are pinned there.

    Raises NumericalFailure (carrying the last estimate) if the refinement
    does not converge.
    """
    if not spread > 0:
        raise ValueError(f"integrate_real_line requires spread > 0, got {spread}")
    lo = center - WINDOW_SPREADS * spread
    hi = center + WINDOW_SPREADS * spread
    cuts = [lo] + [float(b) for b in sorted(breakpoints) if lo < b < hi] + [hi]
    prev = None
    panels = 64
    while panels <= 32768:
        value = _panelled_log_integral(log_integrand, cuts, panels)
        if prev is not None:
            if prev == LOG_ZERO and value == LOG_ZERO:
                return LOG_ZERO
            if abs(value - prev) <= 1e-9:
                return value
        prev = value
        panels *= 2
    raise NumericalFailure(
        f"quadrature did not converge after {panels // 2} panels", last_estimate=prev
    )


def _panelled_log_integral(log_integrand, cuts, panel_budget):
    """Composite Gauss-Legendre over the segments of `cuts`.

    Panels are allotted proportionally to segment length (at least one per
    segment) so kink-bounded unit segments stay cheap while wide tails get
    resolved.
    """
    total_len = cuts[-1] - cuts[0]
    xs, ws = [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        n = max(1, int(round(panel_budget * (b - a) / total_len)))
        edges = np.linspace(a, b, n + 1)
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * (edges[1:] - edges[:-1])
        xs.append((mid[:, None] + half[:, None] * _GL_NODES).ravel())
        ws.append((half[:, None] * _GL_WEIGHTS).ravel())
    x = np.concatenate(xs)
    w = np.concatenate(ws)
    log_f = np.asarray(log_integrand(x), dtype=float)
    if log_f.shape != x.shape:
        raise ValueError("log_integrand must return one value per evaluation point")
    if np.isnan(log_f).any():
        raise NumericalFailure("integrand returned NaN inside the integration window")
    offset = float(log_f.max())
    if offset == LOG_ZERO:
        return LOG_ZERO
    acc = float(np.dot(w, np.exp(log_f - offset)))
    if acc <= 0.0:
        return LOG_ZERO
    return offset + math.log(acc)
