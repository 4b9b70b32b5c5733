"""Return processes: Laplace exponents, exact increments, discount moments."""

import math

import numpy as np
import pytest

from bigjump._rng import stream
from bigjump.levy import (
    BrownianDrift,
    CompoundPoissonSubordinator,
    DeterministicArrivals,
    Drift,
    ExponentialArrivals,
    GammaArrivals,
    GammaSubordinator,
    MomentConditionError,
    check_negativity,
    discount_moment,
    discounted_premium_integral,
    is_subordinator,
    laplace_exponent,
    sample_increment,
)

MODELS = [
    Drift(0.1),
    BrownianDrift(0.1, 0.2),
    GammaSubordinator(2.0, 3.0, 0.5),
    CompoundPoissonSubordinator(2.0, 3.0, 0.1),
]


class TestLaplaceExponent:
    def test_closed_forms(self):
        assert laplace_exponent(Drift(0.1), 1.0) == pytest.approx(-0.1)
        assert laplace_exponent(BrownianDrift(0.1, 0.2), 1.5) == pytest.approx(-0.105)
        assert laplace_exponent(GammaSubordinator(2.0, 3.0, 0.5), 1.0) == pytest.approx(
            -0.5 - 2.0 * math.log(4.0 / 3.0)
        )
        assert laplace_exponent(CompoundPoissonSubordinator(2.0, 3.0, 0.1), 1.0) == pytest.approx(
            -0.1 - 2.0 * 0.25
        )

    def test_domain_errors_name_the_bound(self):
        with pytest.raises(ValueError, match="-3.0"):
            laplace_exponent(GammaSubordinator(2.0, 3.0), -3.0)
        with pytest.raises(ValueError, match="-3.0"):
            laplace_exponent(CompoundPoissonSubordinator(2.0, 3.0), -4.0)

    def test_transform_identity_by_monte_carlo(self):
        # E[e^{-s R(t)}] must equal e^{t phi(s)}
        model = BrownianDrift(0.1, 0.2)
        s, t, n = 1.5, 2.0, 500_000
        expected = math.exp(t * laplace_exponent(model, s))
        assert expected == pytest.approx(0.8105842459701871, rel=1e-12)
        gen = stream(11, "laplace-mc")
        vals = np.exp(-s * sample_increment(model, np.full(n, t), gen))
        err = float(np.std(vals)) / math.sqrt(n)
        assert abs(float(np.mean(vals)) - expected) <= 5.0 * err

    def test_convexity_in_s(self):
        grids = {
            Drift(0.1): np.linspace(-3.0, 3.0, 7),
            BrownianDrift(0.1, 0.2): np.linspace(-3.0, 3.0, 7),
            GammaSubordinator(2.0, 3.0, 0.5): np.linspace(-2.9, 3.0, 7),
            CompoundPoissonSubordinator(2.0, 3.0, 0.1): np.linspace(-2.9, 3.0, 7),
        }
        for model, ss in grids.items():
            for a in ss:
                for b in ss:
                    mid = laplace_exponent(model, (a + b) / 2.0)
                    avg = 0.5 * (laplace_exponent(model, a) + laplace_exponent(model, b))
                    assert mid <= avg + 1e-12


class TestIncrements:
    def test_drift_exact(self):
        t = np.array([0.0, 1.0, 2.5])
        out = sample_increment(Drift(0.1), t, stream(0, "drift"))
        assert np.array_equal(out, 0.1 * t)

    def test_subordinators_dominate_drift_term(self):
        gen = stream(13, "sub-incr")
        t = np.full(100_000, 2.0)
        g = sample_increment(GammaSubordinator(2.0, 3.0, 0.5), t, gen)
        assert np.all(g >= 0.5 * 2.0)
        c = sample_increment(CompoundPoissonSubordinator(2.0, 3.0, 0.1), t, gen)
        assert np.all(c >= 0.1 * 2.0)

    def test_brownian_goes_negative(self):
        gen = stream(13, "bm-incr")
        out = sample_increment(BrownianDrift(0.05, 1.0), np.full(10_000, 1.0), gen)
        assert np.any(out < 0.0)

    def test_gamma_moments(self):
        gen = stream(17, "gamma-mom")
        t = 2.0
        out = sample_increment(GammaSubordinator(2.0, 3.0, 0.5), np.full(1_000_000, t), gen)
        mean = t * (0.5 + 2.0 / 3.0)
        var = t * 2.0 / 9.0
        assert float(np.mean(out)) == pytest.approx(mean, abs=5.0 * math.sqrt(var / 1e6))
        assert float(np.var(out)) == pytest.approx(var, rel=0.02)

    def test_compound_poisson_moments(self):
        gen = stream(19, "cp-mom")
        t = 2.0
        out = sample_increment(CompoundPoissonSubordinator(2.0, 3.0, 0.1), np.full(1_000_000, t), gen)
        mean = t * (0.1 + 2.0 / 3.0)
        var = t * 2.0 * 2.0 / 9.0  # rate * E[J^2]
        assert float(np.mean(out)) == pytest.approx(mean, abs=5.0 * math.sqrt(var / 1e6))
        assert float(np.var(out)) == pytest.approx(var, rel=0.02)

    def test_increment_additivity_in_distribution(self):
        # R(t1 + t2) must match an independent two-step sum; compare moments
        model = GammaSubordinator(1.5, 2.0, 0.2)
        gen = stream(23, "additivity")
        n = 500_000
        one = sample_increment(model, np.full(n, 3.0), gen)
        two = sample_increment(model, np.full(n, 1.0), gen) + sample_increment(
            model, np.full(n, 2.0), gen
        )
        se = math.sqrt(float(np.var(one)) / n) * math.sqrt(2.0)
        assert float(np.mean(one)) == pytest.approx(float(np.mean(two)), abs=5.0 * se)
        assert float(np.var(one)) == pytest.approx(float(np.var(two)), rel=0.03)

    def test_negative_horizon_rejected(self):
        with pytest.raises(ValueError):
            sample_increment(Drift(0.1), -1.0, stream(0, "neg"))


def test_check_negativity():
    assert check_negativity(Drift(0.1), 2.0) == {"phi": pytest.approx(-0.2), "negative": True}
    big_sigma = check_negativity(BrownianDrift(0.1, 1.0), 2.0)
    assert big_sigma["phi"] > 0.0 and not big_sigma["negative"]


def test_is_subordinator():
    assert is_subordinator(Drift(0.1))
    assert not is_subordinator(Drift(0.0))
    assert not is_subordinator(BrownianDrift(0.1, 0.2))
    assert is_subordinator(GammaSubordinator(2.0, 3.0))
    assert is_subordinator(CompoundPoissonSubordinator(2.0, 3.0))


def test_model_parameter_validation():
    with pytest.raises(ValueError):
        Drift(-0.1)
    with pytest.raises(ValueError):
        BrownianDrift(0.1, 0.0)
    with pytest.raises(ValueError):
        GammaSubordinator(0.0, 1.0)
    with pytest.raises(ValueError):
        CompoundPoissonSubordinator(1.0, -1.0)
    with pytest.raises(ValueError):
        ExponentialArrivals(0.0)
    with pytest.raises(ValueError):
        DeterministicArrivals(-1.0)


class TestDiscountMoment:
    def test_exponential_arrivals_closed_form(self):
        # E[W^s] = lambda / (lambda - phi(s)) = 1 / (1 + r s) for pure drift
        dm = discount_moment(Drift(0.1), ExponentialArrivals(1.0), 2.0)
        assert dm.value == pytest.approx(1.0 / 1.2, rel=1e-12)
        assert dm.contractive
        assert float(dm) == dm.value

    def test_deterministic_and_gamma_arrivals(self):
        dm = discount_moment(Drift(0.1), DeterministicArrivals(1.0), 1.5)
        assert dm.value == pytest.approx(math.exp(-0.15), rel=1e-12)
        dm = discount_moment(Drift(0.3), GammaArrivals(2.0, 3.0), 1.0)
        assert dm.value == pytest.approx(1.1**-2.0, rel=1e-12)

    def test_non_contractive_flagged(self):
        dm = discount_moment(BrownianDrift(0.1, 0.5), ExponentialArrivals(1.0), 2.0)
        # phi(2) = -0.2 + 4 * 0.25 / 2 = 0.3 > 0 but still inside the mgf domain
        assert dm.value == pytest.approx(1.0 / 0.7, rel=1e-12)
        assert not dm.contractive

    def test_mgf_domain_violation_raises(self):
        with pytest.raises(MomentConditionError, match="rate = 1.0"):
            discount_moment(BrownianDrift(0.1, 2.0), ExponentialArrivals(1.0), 2.0)

    def test_monte_carlo_agreement(self):
        model = GammaSubordinator(2.0, 3.0, 0.1)
        arrival = ExponentialArrivals(1.0)
        s = 1.5
        dm = discount_moment(model, arrival, s)
        gen = stream(29, "dm-mc")
        theta = arrival.sample(gen, 400_000)
        w = np.exp(-s * sample_increment(model, theta, gen))
        err = float(np.std(w)) / math.sqrt(w.size)
        assert float(np.mean(w)) == pytest.approx(dm.value, abs=5.0 * err)


class TestArrivalComposites:
    def test_convolution_matches_repeated_sums(self):
        gen = stream(31, "conv-arrivals")
        for law in (ExponentialArrivals(2.0), GammaArrivals(1.5, 2.0), DeterministicArrivals(0.7)):
            n = 200_000
            direct = law.convolution_sample(gen, n, 4)
            stacked = sum(law.sample(gen, n) for _ in range(4))
            se = math.sqrt((float(np.var(stacked)) + 1e-30) / n)
            assert float(np.mean(direct)) == pytest.approx(
                float(np.mean(stacked)), abs=5.0 * se + 1e-12
            )
            assert law.convolution_sample(gen, 3, 0).tolist() == [0.0, 0.0, 0.0]

    def test_means(self):
        assert ExponentialArrivals(2.0).mean == 0.5
        assert GammaArrivals(1.5, 2.0).mean == 0.75
        assert DeterministicArrivals(0.7).mean == 0.7


class TestPremiumIntegral:
    def test_drift_closed_form(self):
        # unit premium under 10% drift over [0, 10]
        out = discounted_premium_integral([0.0, 10.0], [0.0, 1.0], 1.0)
        assert out == pytest.approx((1.0 - math.exp(-1.0)) / 0.1, rel=1e-12)
        assert out == pytest.approx(6.321205588285577, rel=1e-12)

    def test_flat_segment(self):
        out = discounted_premium_integral([0.0, 2.0], [0.5, 0.5], 2.0)
        assert out == pytest.approx(2.0 * 2.0 * math.exp(-0.5), rel=1e-12)

    def test_piecewise_path_matches_dense_quadrature(self):
        times = [0.0, 1.0, 3.0, 4.0]
        rvals = [0.0, 0.3, 0.3, 1.1]
        exact = discounted_premium_integral(times, rvals, 1.3)
        tt = np.linspace(0.0, 4.0, 200_001)
        rr = np.interp(tt, times, rvals)
        dense = np.trapezoid(1.3 * np.exp(-rr), tt)
        assert exact == pytest.approx(float(dense), rel=1e-8)

    def test_input_validation(self):
        with pytest.raises(ValueError):
            discounted_premium_integral([0.0], [0.0], 1.0)
        with pytest.raises(ValueError):
            discounted_premium_integral([0.0, 0.0], [0.0, 1.0], 1.0)
