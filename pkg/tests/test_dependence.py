"""Dependence structures: mixture tilts, comonotone coupling, diagnostics."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bigjump._rng import stream
from bigjump.claims import IndependentComponents, Spectral, SpectralMRV
from bigjump.dependence import (
    Comonotone,
    HMixture,
    Independent,
    comonotone_product_law,
    conditional_tail_profile,
    expected_product_index,
    h_function,
    product_tail_index,
    sample_pair,
    tai_diagnostic,
    tilted_weight_sampler,
    verify_h_normalization,
    weight_moment,
    weight_support,
)
from bigjump.levy import (
    BrownianDrift,
    DeterministicArrivals,
    Drift,
    ExponentialArrivals,
    GammaSubordinator,
    MomentConditionError,
)
from bigjump.sets import preset_a2
from bigjump.tails import Exponential, Pareto

TWO_AXES = SpectralMRV(
    alpha=2.0,
    radial=Pareto(2.0, 1.0),
    atoms=((0.5, (1.0, 0.0)), (0.5, (0.0, 1.0))),
)
LIGHT_PAIR = IndependentComponents((Exponential(1.0), Exponential(1.0)))

# Drift(1) with unit-rate exponential gaps makes W = e^{-theta} exactly
# uniform on (0, 1), so every tilt quantity below has a pencil value.
UNIFORM_W = (Drift(1.0), ExponentialArrivals(1.0))


def linear_mixture(a=0.0, b=1.0):
    return HMixture(a=a, b=b, heavy=Spectral(TWO_AXES), light=LIGHT_PAIR)


class TestHFunction:
    def test_closed_form_expected_q(self):
        h = h_function(linear_mixture(), *UNIFORM_W)
        assert h.method == "closed_form"
        assert h.expected_q == pytest.approx(0.5, rel=1e-12)
        assert h.sup == pytest.approx(2.0, rel=1e-12)
        assert h(0.25) == pytest.approx(0.5, rel=1e-12)

    def test_exponential_gap_tilt(self):
        # q(y) = y with drift 0.1 and unit-rate gaps: E[W] = 1/1.1, h(y) = 1.1 y
        h = h_function(linear_mixture(), Drift(0.1), ExponentialArrivals(1.0))
        assert h.method == "closed_form"
        assert h.expected_q == pytest.approx(1.0 / 1.1, rel=1e-12)
        assert h(0.5) == pytest.approx(0.55, rel=1e-12)

    def test_independent_tilt_is_flat(self):
        h = h_function(Independent(), *UNIFORM_W)
        assert h.method == "closed_form"
        assert h.expected_q == 1.0 and h.sup == 1.0
        assert np.all(h(np.array([0.1, 0.5, 0.9])) == 1.0)

    def test_normalization_monte_carlo(self):
        report = verify_h_normalization(linear_mixture(), *UNIFORM_W, n=400_000)
        assert report["within_3se"]
        assert abs(report["mean_h"] - 1.0) < 0.01

    def test_clipped_region_falls_back_to_monte_carlo(self):
        # q clips to 1 above y = 0.5, so the affine shortcut is invalid
        h = h_function(linear_mixture(a=0.5, b=1.0), *UNIFORM_W)
        assert h.method == "monte_carlo"
        # E[min(1, 0.5 + U)] = 0.875 for U uniform on (0, 1)
        assert h.expected_q == pytest.approx(0.875, abs=2e-3)

    def test_unbounded_weight_support_falls_back(self):
        h = h_function(linear_mixture(a=0.0, b=0.5), BrownianDrift(0.5, 0.3), ExponentialArrivals(1.0))
        assert h.method == "monte_carlo"

    def test_degenerate_tilt_rejected(self):
        with pytest.raises(ValueError, match="degenerate"):
            h_function(linear_mixture(a=0.0, b=0.0), *UNIFORM_W)

    def test_comonotone_has_no_tilt(self):
        com = Comonotone(alpha=2.0, beta=2.0, s0=0.2, atoms=((1.0, (1.0, 1.0)),))
        with pytest.raises(TypeError, match="no mixture tilt"):
            h_function(com, *UNIFORM_W)

    @given(
        a=st.floats(-1.0, 2.0),
        b=st.floats(-2.0, 2.0),
        y=st.floats(0.0, 10.0),
    )
    @settings(max_examples=200, deadline=None)
    def test_mixing_probability_stays_in_unit_interval(self, a, b, y):
        spec = linear_mixture(a=a, b=b)
        q = float(spec.q(y))
        assert 0.0 <= q <= 1.0


class TestTiltedSampler:
    def test_acceptance_rate_is_reciprocal_envelope(self):
        sampler = tilted_weight_sampler(linear_mixture(), *UNIFORM_W)
        assert sampler.acceptance_rate == pytest.approx(0.5, rel=1e-12)

    def test_tilted_mean_and_cdf(self):
        # h(y) = 2y on (0, 1): tilted density 2y, mean 2/3, P(W_h <= 1/2) = 1/4
        sampler = tilted_weight_sampler(linear_mixture(), *UNIFORM_W)
        w = sampler.sample(stream(90_901, "tilted-draws"), 200_000)
        assert w.shape == (200_000,)
        assert np.all((w > 0.0) & (w < 1.0))
        assert float(w.mean()) == pytest.approx(2.0 / 3.0, abs=3e-3)
        assert float(np.mean(w <= 0.5)) == pytest.approx(0.25, abs=5e-3)


class TestSamplePair:
    def test_mixture_shapes_and_support(self):
        pair = sample_pair(linear_mixture(), None, *UNIFORM_W, stream(90_902, "pair"), 10_000)
        assert pair.claim.shape == (10_000, 2)
        assert pair.weight.shape == (10_000,)
        assert np.all(pair.claim >= 0.0)
        assert np.all((pair.weight > 0.0) & (pair.weight < 1.0))

    def test_mixture_population_rate(self):
        # only the heavy population can push the sup-norm past 20:
        # P = E[q(W)] * P(radius > 20) = 0.5 / 400 = 1.25e-3
        n = 2_000_000
        pair = sample_pair(linear_mixture(), None, *UNIFORM_W, stream(90_903, "pair-rate"), n)
        rate = float(np.mean(pair.claim.max(axis=1) > 20.0))
        assert rate == pytest.approx(1.25e-3, abs=2e-4)

    def test_independent_needs_claims(self):
        with pytest.raises(ValueError, match="claim model"):
            sample_pair(Independent(), None, *UNIFORM_W, stream(90_904, "x"), 10)

    def test_independent_pairs_with_weight(self):
        pair = sample_pair(
            Independent(), LIGHT_PAIR, *UNIFORM_W, stream(90_905, "indep"), 50_000
        )
        assert pair.claim.shape == (50_000, 2)
        assert float(pair.weight.mean()) == pytest.approx(0.5, abs=5e-3)

    def test_comonotone_ignores_return_process(self):
        com = Comonotone(alpha=2.0, beta=2.0, s0=0.2, atoms=((1.0, (1.0, 1.0)),))
        pair = sample_pair(com, None, None, None, stream(90_906, "com"), 20_000)
        assert pair.claim.shape == (20_000, 2)
        # weight floor s0 is attained in the U -> 1 limit
        assert float(pair.weight.min()) >= 0.2


class TestComonotone:
    def test_validation(self):
        atoms = ((1.0, (1.0, 1.0)),)
        with pytest.raises(ValueError, match="s0"):
            Comonotone(alpha=2.0, beta=2.0, s0=1.0, atoms=atoms)
        with pytest.raises(ValueError, match="s0"):
            Comonotone(alpha=2.0, beta=2.0, s0=0.0, atoms=atoms)
        with pytest.raises(ValueError, match="beta"):
            Comonotone(alpha=2.0, beta=0.0, s0=0.2, atoms=atoms)
        with pytest.raises(ValueError, match="sum to 1"):
            Comonotone(alpha=2.0, beta=2.0, s0=0.2, atoms=((0.5, (1.0, 1.0)),))
        with pytest.raises(ValueError, match="sup-norm"):
            Comonotone(alpha=2.0, beta=2.0, s0=0.2, atoms=((1.0, (0.5, 0.4)),))

    def test_kappa(self):
        com = Comonotone(alpha=2.0, beta=2.0, s0=0.2, atoms=((1.0, (1.0, 1.0)),))
        assert com.kappa == pytest.approx(1.0, rel=1e-12)
        skew = Comonotone(alpha=3.0, beta=1.5, s0=0.2, atoms=((1.0, (1.0, 1.0)),))
        assert skew.kappa == pytest.approx(1.0, rel=1e-12)

    def test_weight_moments_closed_form(self):
        com = Comonotone(alpha=2.0, beta=2.0, s0=0.2, atoms=((1.0, (1.0, 1.0)),))
        # E[W^p] = s0^p / (1 - p/beta) below the divergence order
        assert weight_moment(com, None, None, 1.5) == pytest.approx(
            0.35777087639996635, rel=1e-12
        )
        assert weight_moment(com, None, None, 1.0) == pytest.approx(0.4, rel=1e-12)
        with pytest.raises(MomentConditionError, match="beta = 2.0"):
            weight_moment(com, None, None, 2.0)

    def test_exact_product_tail_single_atom(self):
        # shared uniform gives X_A W = s0 / U, a pure Pareto(1, s0) product
        com = Comonotone(alpha=2.0, beta=2.0, s0=0.2, atoms=((1.0, (1.0, 1.0)),))
        S = preset_a2([0.5, 0.5], 1.0)
        law = comonotone_product_law(com, S)
        assert law["kappa"] == pytest.approx(1.0, rel=1e-12)
        assert law["mu_hat"] == pytest.approx(1.0, rel=1e-12)
        assert law["reference"] == Pareto(1.0, 0.2)

        n = 1_000_000
        pair = sample_pair(com, None, None, None, stream(90_907, "com-tail"), n)
        proj = pair.claim @ np.array([0.5, 0.5])
        for x in (2.0, 10.0, 50.0):
            p = 0.2 / x
            se = math.sqrt(p * (1.0 - p) / n)
            assert float(np.mean(proj * pair.weight > x)) == pytest.approx(p, abs=3 * se)

    def test_product_law_multi_atom(self):
        com = Comonotone(
            alpha=2.0, beta=2.0, s0=0.2, atoms=((0.5, (1.0, 0.0)), (0.5, (0.0, 1.0)))
        )
        law = comonotone_product_law(com, preset_a2([0.5, 0.5], 1.0))
        # projections are 0.5 per atom and kappa = 1, so the mass halves
        assert law["mu_hat"] == pytest.approx(0.5, rel=1e-12)
        with pytest.raises(ValueError, match="dimension"):
            comonotone_product_law(com, preset_a2([0.5, 0.3, 0.2], 1.0))


class TestWeightSupportAndIndex:
    def test_weight_support_cases(self):
        assert weight_support(Drift(0.5), DeterministicArrivals(2.0)) == (
            pytest.approx(math.exp(-1.0)),
            pytest.approx(math.exp(-1.0)),
        )
        assert weight_support(BrownianDrift(0.5, 0.3), ExponentialArrivals(1.0)) == (
            0.0,
            math.inf,
        )
        lo, hi = weight_support(GammaSubordinator(1.0, 2.0, drift=0.3), DeterministicArrivals(2.0))
        assert lo == 0.0 and hi == pytest.approx(math.exp(-0.6), rel=1e-12)
        assert weight_support(GammaSubordinator(1.0, 2.0), ExponentialArrivals(1.0)) == (0.0, 1.0)

    def test_expected_product_index(self):
        assert expected_product_index(Independent(), Spectral(TWO_AXES)) == pytest.approx(2.0)
        assert expected_product_index(linear_mixture()) == pytest.approx(2.0)
        com = Comonotone(alpha=2.0, beta=2.0, s0=0.2, atoms=((1.0, (1.0, 1.0)),))
        assert expected_product_index(com) == pytest.approx(1.0)
        with pytest.raises(ValueError, match="claim model"):
            expected_product_index(Independent())

    def test_product_index_comonotone_hill(self):
        # the coupled product is exactly Pareto(1, 0.2): Hill should land on 1
        com = Comonotone(alpha=2.0, beta=2.0, s0=0.2, atoms=((1.0, (1.0, 1.0)),))
        S = preset_a2([0.5, 0.5], 1.0)
        est = product_tail_index(com, None, None, None, S, n=200_000, k=2_000, seed=90_911)
        assert est.method == "hill_product"
        assert est.details["expected"] == pytest.approx(1.0)
        assert est.details["n_dropped"] == 0
        assert abs(est.value - 1.0) < 3.0 * est.standard_error

    def test_product_index_weak_mixture_hill(self):
        S = preset_a2([0.5, 0.5], 1.0)
        est = product_tail_index(
            linear_mixture(), None, Drift(0.1), ExponentialArrivals(1.0), S, n=400_000, k=500, seed=90_912
        )
        # mixture products inherit the heavy index 2 in the far tail
        assert est.details["expected"] == pytest.approx(2.0)
        assert abs(est.value - 2.0) < 4.0 * est.standard_error

    def test_product_index_dimension_guard(self):
        com = Comonotone(alpha=2.0, beta=2.0, s0=0.2, atoms=((1.0, (1.0, 1.0)),))
        with pytest.raises(ValueError, match="dimension"):
            product_tail_index(com, None, None, None, preset_a2([1.0], 1.0), n=1000, k=10)

    def test_weak_weight_moment_delegates(self):
        assert weight_moment(Independent(), *UNIFORM_W, 1.0) == pytest.approx(0.5, rel=1e-12)
        assert weight_moment(linear_mixture(), *UNIFORM_W, 2.0) == pytest.approx(
            1.0 / 3.0, rel=1e-12
        )


class TestConditionalTail:
    def test_mixture_conditional_tail_tracks_mixing(self):
        # claims above x = 10 are heavy-population events, so the conditional
        # exceedance rate across weight bins should scale like q(mid)
        rows = conditional_tail_profile(
            linear_mixture(),
            *UNIFORM_W,
            S=preset_a2([0.5, 0.5], 1.0),
            x=10.0,
            bins=[(0.15, 0.25), (0.45, 0.55), (0.75, 0.85)],
            n=6_000_000,
            seed=90_908,
        )
        assert [r["bin"][0] for r in rows] == [0.15, 0.45, 0.75]
        for r in rows:
            assert r["n_bin"] > 100_000
            assert 0.7 < r["ratio"] < 1.3
        for r in rows[1:]:
            assert 0.85 < r["ratio"] < 1.15


class TestTaiDiagnostic:
    def test_identical_inputs_flagged(self):
        x = stream(90_909, "tai-id").pareto(1.0, 10_000) + 1.0
        report = tai_diagnostic(x, x, [1e-2, 1e-3])
        assert report["flags"] == ["identical_inputs"]
        assert report["conditional"] == [1.0, 1.0]

    def test_independent_products_decouple(self):
        gen = stream(90_910, "tai-indep")
        n = 1_000_000
        a = gen.pareto(1.0, n) + 1.0
        b = gen.pareto(1.0, n) + 1.0
        report = tai_diagnostic(a, b, [1e-2, 1e-3])
        assert not report["flags"]
        by_level = dict(zip(report["levels"], report["conditional"]))
        # under independence the conditional rate is the level itself
        assert by_level[1e-2] < 0.03
        assert by_level[1e-3] < 0.01

    def test_comonotone_products_lock_together(self):
        u = 1.0 - stream(90_911, "tai-com").random(1_000_000)
        report = tai_diagnostic(u**-1.0, u**-0.5, [1e-2, 1e-3])
        assert all(c >= 0.98 for c in report["conditional"])

    def test_starved_levels_dropped(self):
        gen = stream(90_912, "tai-starve")
        a = gen.pareto(1.0, 1_000) + 1.0
        b = gen.pareto(1.0, 1_000) + 1.0
        report = tai_diagnostic(a, b, [1e-1, 1e-4])
        assert report["levels"] == [1e-1]
        assert any(f.startswith("starved_at_") for f in report["flags"])

    def test_validation(self):
        with pytest.raises(ValueError, match="equal-length"):
            tai_diagnostic(np.ones(5), np.ones(6), [1e-2])
        with pytest.raises(ValueError, match="probabilities"):
            tai_diagnostic(np.ones(5), np.ones(5), [1.5])
