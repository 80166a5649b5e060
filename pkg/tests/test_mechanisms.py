import math

import mpmath
import pytest

from groupdp.mechanisms import (
    Gaussian,
    Laplace,
    RandomizedResponse,
    Skellam,
    family_name,
    gaussian_group_tau,
    group_tau,
    laplace_group_tau,
    make_mechanism,
    noise_value,
    rr_group_tau,
    skellam_group_tau,
)


class TestSpecValidation:
    def test_gaussian_rejects_nonpositive_sigma(self):
        with pytest.raises(ValueError):
            Gaussian(0.0)
        with pytest.raises(ValueError):
            Gaussian(-1.0)

    def test_laplace_rejects_nonpositive_scale(self):
        with pytest.raises(ValueError):
            Laplace(0.0)

    def test_skellam_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            Skellam(0.0)
        with pytest.raises(ValueError):
            Skellam(4.0, sensitivity_c=0)
        with pytest.raises(ValueError):
            Skellam(4.0, sensitivity_c=1.5)

    def test_rr_rejects_boundary_probabilities(self):
        # the ends degenerate (tau = 0 or infinity) and are rejected, not clamped
        for p in (0.5, 1.0, 0.2, 1.3):
            with pytest.raises(ValueError):
                RandomizedResponse(p)

    def test_family_helpers(self):
        mech = make_mechanism("skellam", 4.0, sensitivity_c=3)
        assert mech == Skellam(4.0, sensitivity_c=3)
        assert family_name(mech) == "skellam"
        assert noise_value(mech) == 4.0
        assert noise_value(make_mechanism("rr", 0.75)) == 0.75
        with pytest.raises(ValueError):
            make_mechanism("cauchy", 1.0)


class TestGaussianGroupTau:
    def test_zero_shift(self):
        assert gaussian_group_tau(0, 7.0, 0.1) == 0.0

    def test_hand_values(self):
        assert gaussian_group_tau(1, 4.0, 2.0) == pytest.approx(0.5, rel=1e-15)
        assert gaussian_group_tau(3, 2.0, 3.0) == pytest.approx(1.0, rel=1e-15)

    def test_quadratic_scaling_in_group_size(self):
        # triangle inequality makes the k-record shift exactly k times the unit one
        base = gaussian_group_tau(1, 4.0, 1.7)
        for k in range(65):
            assert gaussian_group_tau(k, 4.0, 1.7) == pytest.approx(k * k * base, rel=1e-12)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            gaussian_group_tau(-1, 2.0, 1.0)
        with pytest.raises(ValueError):
            gaussian_group_tau(1, 1.0, 1.0)
        with pytest.raises(ValueError):
            gaussian_group_tau(1, 2.0, 0.0)


class TestLaplaceGroupTau:
    def test_zero_shift_weights_sum_to_one(self):
        assert laplace_group_tau(0, 2.0, 1.0) == 0.0

    def test_hand_value(self):
        # (2/3) e + (1/3) e^-2 = 1.8572996...
        expected = math.log(2.0 / 3.0 * math.e + 1.0 / 3.0 * math.exp(-2.0))
        assert laplace_group_tau(1, 2.0, 1.0) == pytest.approx(expected, rel=1e-14)
        assert laplace_group_tau(1, 2.0, 1.0) == pytest.approx(0.61912362999859283, rel=1e-12)

    def test_high_precision_value(self):
        a, k, b = 3, 2, 2
        phi = mpmath.mpf(a) / (2 * a - 1) * mpmath.e ** (mpmath.mpf((a - 1) * k) / b) + \
            mpmath.mpf(a - 1) / (2 * a - 1) * mpmath.e ** (mpmath.mpf(-a * k) / b)
        expected = float(mpmath.log(phi) / (a - 1))
        assert laplace_group_tau(2, 3.0, 2.0) == pytest.approx(expected, rel=1e-12)
        assert laplace_group_tau(2, 3.0, 2.0) == pytest.approx(0.74682814106896981, rel=1e-12)

    def test_no_overflow_at_extreme_orders(self):
        value = laplace_group_tau(1, 25600.0, 0.5)
        assert math.isfinite(value)
        # dominated by the growing exponential: tau -> k/b as alpha -> inf
        assert value == pytest.approx(2.0, rel=1e-2)


class TestSkellamGroupTau:
    def test_zero_shift(self):
        assert skellam_group_tau(0, 2.0, 4.0) == 0.0

    def test_first_branch(self):
        assert skellam_group_tau(1, 2.0, 4.0, 1) == pytest.approx(0.390625, rel=1e-15)

    def test_branch_switch(self):
        # second branch becomes the smaller one: 4 + min{6, 3} = 7
        assert skellam_group_tau(2, 2.0, 1.0, 1) == pytest.approx(7.0, rel=1e-15)

    def test_sensitivity_enters_corrections(self):
        loose = skellam_group_tau(2, 2.0, 4.0, 1)
        tight = skellam_group_tau(2, 2.0, 4.0, 4)
        assert tight < loose  # larger integer sensitivity shrinks both branches


class TestRandomizedResponseTau:
    def test_uniform_coin_reveals_nothing(self):
        assert rr_group_tau(2.0, 0.5 + 1e-9) == pytest.approx(0.0, abs=1e-9)

    def test_hand_value(self):
        expected = math.log(0.75**2 / 0.25 + 0.25**2 / 0.75)
        assert rr_group_tau(2.0, 0.75) == pytest.approx(expected, rel=1e-14)
        assert rr_group_tau(2.0, 0.75) == pytest.approx(0.84729786038720361, rel=1e-12)

    def test_high_precision_value(self):
        p, a = mpmath.mpf("0.9"), 3
        phi = p**a / (1 - p) ** (a - 1) + (1 - p) ** a / p ** (a - 1)
        expected = float(mpmath.log(phi) / (a - 1))
        assert rr_group_tau(3.0, 0.9) == pytest.approx(expected, rel=1e-12)
        assert rr_group_tau(3.0, 0.9) == pytest.approx(2.14455278697951196, rel=1e-12)

    def test_rejects_out_of_range(self):
        for p in (0.5, 1.0, 0.4):
            with pytest.raises(ValueError):
                rr_group_tau(2.0, p)


class TestMonotonicity:
    @pytest.mark.parametrize(
        "tau_fn",
        [
            lambda k: gaussian_group_tau(k, 4.0, 3.0),
            lambda k: laplace_group_tau(k, 4.0, 3.0),
            lambda k: skellam_group_tau(k, 4.0, 9.0, 1),
        ],
    )
    def test_nondecreasing_in_group_size(self, tau_fn):
        values = [tau_fn(k) for k in range(65)]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_nonincreasing_in_noise(self):
        sigmas = [0.5, 1.0, 2.0, 4.0, 8.0]
        for k in (1, 3):
            gauss = [gaussian_group_tau(k, 4.0, s) for s in sigmas]
            lap = [laplace_group_tau(k, 4.0, s) for s in sigmas]
            sk = [skellam_group_tau(k, 4.0, s * s, 1) for s in sigmas]
            for seq in (gauss, lap, sk):
                assert all(b <= a for a, b in zip(seq, seq[1:]))
        rr = [rr_group_tau(3.0, p) for p in (0.51, 0.6, 0.75, 0.9, 0.99)]
        assert all(b >= a for a, b in zip(rr, rr[1:]))  # p down toward 1/2 = more noise


class TestDivergenceKernelProperties:
    @pytest.mark.parametrize("alpha", range(2, 11))
    def test_rr_kernel_exceeds_one_and_increases(self, alpha):
        grid = [0.51 + 0.02 * i for i in range(25)]  # 0.51 .. 0.99
        phis = [p**alpha / (1 - p) ** (alpha - 1) + (1 - p) ** alpha / p ** (alpha - 1) for p in grid]
        assert all(phi > 1.0 for phi in phis)
        assert all(b > a for a, b in zip(phis, phis[1:]))

    def test_two_exponential_map_is_midpoint_convex(self):
        # the maximization over the L1 ball leans on convexity of this map
        constants = [
            (0.8, 0.2, 1.0, 2.0),
            (2.0 / 3.0, 1.0 / 3.0, 1.0, 2.0),
            (0.1, 3.0, 0.25, 5.0),
            (5.0, 0.01, 4.0, 0.5),
        ]
        xs = [-3.0 + 0.5 * i for i in range(13)]
        for c1, c2, b1, b2 in constants:
            f = lambda x: math.log(c1 * math.exp(b1 * x) + c2 * math.exp(-b2 * x))
            for x in xs:
                for y in xs:
                    assert f(0.5 * (x + y)) <= 0.5 * (f(x) + f(y)) + 1e-9


class TestGroupTauDispatch:
    def test_dispatches_each_family(self):
        assert group_tau(Gaussian(2.0), 1, 4.0) == gaussian_group_tau(1, 4.0, 2.0)
        assert group_tau(Laplace(1.0), 2, 2.0) == laplace_group_tau(2, 2.0, 1.0)
        assert group_tau(Skellam(4.0, 2), 1, 2.0) == skellam_group_tau(1, 2.0, 4.0, 2)
        assert group_tau(RandomizedResponse(0.75), 5, 2.0) == rr_group_tau(2.0, 0.75)

    def test_rr_zero_group_size_vanishes(self):
        assert group_tau(RandomizedResponse(0.75), 0, 2.0) == 0.0

    def test_rr_group_independent(self):
        mech = RandomizedResponse(0.9)
        values = {group_tau(mech, k, 3.0) for k in range(1, 20)}
        assert len(values) == 1
