"""Inverse accounting: binary-search the noise that meets a target guarantee.

The accountants are monotone in the noise parameter (more noise, less
divergence), which makes bisection exact: the search keeps one feasible and
one infeasible endpoint and returns the feasible one, so the reported noise
always meets the target.

Brackets and stopping rules are fixed for reproducibility:
  sigma / b / mu: [1e-3, 1e9], geometric bisection, relative width 1e-6;
  p:              [0.5 + 1e-9, 1 - 1e-9], bisection, absolute width 1e-9.
Note the inverted direction for randomized response: noise grows as p drops
toward 1/2, so the feasible end is the lower one.
"""
from __future__ import annotations

import math
from typing import Sequence

from .accountant import (
    DEFAULT_ALPHA_GRID,
    GpGuarantee,
    RgpGuarantee,
    compose,
    rgp_to_gp,
    single_round_tau,
)
from .baseline import baseline_round_tau
from .lower_bounds import lower_bound
from .mechanisms import MechanismSpec, family_name, make_mechanism
from .numerics import NumericalFailure

ACCOUNTANTS = ("ours", "baseline", "lower")

_SCALE_BRACKET = (1e-3, 1e9)
_P_BRACKET = (0.5 + 1e-9, 1.0 - 1e-9)


class CalibrationInfeasible(Exception):
    """The target cannot be met anywhere inside the search bracket.

    `achievable` holds the (best, worst) metric values reached at the bracket
    endpoints, i.e. the range the chosen accountant can certify.
    """

    def __init__(self, message: str, achievable: tuple[float, float]):
        super().__init__(message)
        self.achievable = achievable


def round_tau(accountant: str, mechanism: MechanismSpec, m: int, alpha: float, q: float) -> float:
    """Single-iteration tau at order alpha under the chosen accountant."""
    if accountant == "ours":
        return single_round_tau(mechanism, m, alpha, q)
    if accountant == "baseline":
        return baseline_round_tau(mechanism, m, alpha, q)
    if accountant == "lower":
        return lower_bound(mechanism, m, alpha, q)
    raise ValueError(f"unknown accountant {accountant!r}; expected one of {ACCOUNTANTS}")


def achieved_guarantee(
    mechanism: MechanismSpec,
    target: RgpGuarantee | GpGuarantee,
    *,
    q: float,
    iterations: int,
    accountant: str = "ours",
    alpha_grid: Sequence[float] | None = None,
) -> tuple[float, float]:
    """(metric, alpha_used) the accountant certifies for the target's shape.

    For a divergence target the metric is the composed tau at the target's
    fixed order; for an (epsilon, delta) target it is the smallest epsilon
    over the order grid.
    """
    if isinstance(target, RgpGuarantee):
        tau = compose(round_tau(accountant, mechanism, target.m, target.alpha, q), iterations)
        return tau, float(target.alpha)
    grid = _grid_for(accountant, alpha_grid)
    best: tuple[float, float] | None = None
    for alpha in grid:
        tau = compose(round_tau(accountant, mechanism, target.m, alpha, q), iterations)
        eps = rgp_to_gp(RgpGuarantee(target.m, alpha, tau), target.delta).epsilon
        if best is None or eps < best[0]:
            best = (eps, float(alpha))
    assert best is not None
    return best


def _grid_for(accountant: str, alpha_grid: Sequence[float] | None) -> tuple[float, ...]:
    grid = tuple(alpha_grid) if alpha_grid is not None else DEFAULT_ALPHA_GRID
    if len(grid) == 0:
        raise ValueError("alpha_grid must be non-empty")
    if accountant == "baseline":
        grid = tuple(a for a in grid if a == int(a) and a >= 2)
        if len(grid) == 0:
            raise ValueError("the baseline accountant needs integer orders >= 2 in the grid")
    return grid


def calibrate(
    mechanism: str | MechanismSpec,
    target: RgpGuarantee | GpGuarantee,
    *,
    q: float,
    iterations: int,
    accountant: str = "ours",
    alpha_grid: Sequence[float] | None = None,
    sensitivity_c: int = 1,
) -> float:
    """Smallest noise (sigma/b/mu; largest p) whose guarantee meets the target.

    Args:
      mechanism: family name ("gaussian" | "laplace" | "skellam" | "rr") or a
        mechanism instance whose noise value is ignored.
      target: the guarantee to meet; its group size m is taken from it.
      q, iterations: sampling rate and composition length of the query.
      accountant: which bound to invert ("ours", "baseline" or "lower").
      alpha_grid: order grid for (epsilon, delta) targets; defaults to 2..100.
      sensitivity_c: Skellam sensitivity (ignored elsewhere).

    Raises:
      CalibrationInfeasible: the bracket's noisiest end still misses the
        target; the exception reports the achievable range.
    """
    if isinstance(mechanism, str):
        family = mechanism
    else:
        family = family_name(mechanism)
        if family == "skellam":
            sensitivity_c = mechanism.sensitivity_c
    if accountant not in ACCOUNTANTS:
        raise ValueError(f"unknown accountant {accountant!r}; expected one of {ACCOUNTANTS}")

    if isinstance(target, RgpGuarantee):
        target_value = target.tau
    else:
        target_value = target.epsilon

    def metric(noise: float) -> float:
        mech = make_mechanism(family, noise, sensitivity_c)
        return achieved_guarantee(
            mech, target, q=q, iterations=iterations,
            accountant=accountant, alpha_grid=alpha_grid,
        )[0]

    def metric_or_inf(noise: float) -> float:
        # a probe the accountant cannot evaluate (e.g. quadrature starved by
        # an absurdly small noise at the bracket edge) cannot be certified,
        # so it conservatively counts as missing the target
        try:
            return metric(noise)
        except NumericalFailure:
            return math.inf

    if family == "rr":
        noisy_end, quiet_end = _P_BRACKET  # p near 1/2 is the noisy end
    else:
        quiet_end, noisy_end = _SCALE_BRACKET

    at_noisy = metric(noisy_end)  # failures here propagate: nothing is certifiable
    at_quiet = metric_or_inf(quiet_end)
    if at_noisy > at_quiet:
        raise RuntimeError(
            f"accountant {accountant!r} is not monotone in the {family} noise "
            f"parameter over the bracket ({at_noisy} at the noisy end vs {at_quiet})"
        )
    if at_noisy > target_value:
        raise CalibrationInfeasible(
            f"target {target_value} is unreachable for {family} under {accountant}: "
            f"achievable range is [{at_noisy}, {at_quiet}] over the search bracket",
            achievable=(at_noisy, at_quiet),
        )
    if at_quiet <= target_value:
        return quiet_end  # the whole bracket already meets the target

    if family == "rr":
        # invariant: metric(lo) <= target < metric(hi); return the feasible lo
        lo, hi = _P_BRACKET
        while hi - lo > 1e-9:
            mid = 0.5 * (lo + hi)
            if metric_or_inf(mid) <= target_value:
                lo = mid
            else:
                hi = mid
        return lo
    # invariant: metric(hi) <= target < metric(lo); return the feasible hi
    lo, hi = _SCALE_BRACKET
    while hi - lo > 1e-6 * hi:
        mid = math.sqrt(lo * hi)
        if metric_or_inf(mid) <= target_value:
            hi = mid
        else:
            lo = mid
    return hi
