"""Loss arithmetic, premiums, and the aggregate-loss Panjer oracle."""

import math

import numpy as np
import pytest

from cyberrisk.distributions import CountDistributionParams, DiscreteTable, Fixed
from cyberrisk.errors import DomainError
from cyberrisk.loss_model import (
    AggregateLossParams,
    DeviceParameters,
    discount_factor,
    expected_capped_loss_days,
    expected_present_loss,
    portfolio_loss,
    premium_schedule,
    simulate_aggregate_loss,
    simulate_aggregate_loss_batch,
    simulate_device,
)
from cyberrisk.streams import derive_stream

from oracles import panjer_compound_poisson_cdf


def _device(theta=1.0, lam=0.0, b=1000.0, r=0.03, kill=0.0, horizon=365):
    return DeviceParameters(
        daily_loss=b, discount_rate=r, horizon_days=horizon, kill_rate=kill,
        counts=CountDistributionParams(theta=theta, lambda_cluster=lam),
    )


class TestDiscountFactor:
    def test_values(self):
        assert discount_factor(0.0) == 1.0
        assert discount_factor(0.03) == pytest.approx(0.9708738, abs=5e-8)
        assert discount_factor(1.0) == 0.5

    def test_domain(self):
        with pytest.raises(DomainError):
            discount_factor(-1.0)


class TestSimulateDevice:
    def test_present_loss_formula(self):
        # find a stream whose drawn count is 3, then check the monetization
        params = _device(theta=3.0)
        for sid in range(200):
            probe = derive_stream(11, sid)
            if simulate_device(probe, params).loss_days == 3:
                outcome = simulate_device(derive_stream(11, sid), params)
                assert outcome.present_loss == pytest.approx(1000 * 3 / 1.03, rel=1e-12)
                assert outcome.survived_horizon
                break
        else:
            pytest.fail("no stream with a count of 3 in 200 candidates")

    def test_killed_device_loses_nothing(self):
        # enormous kill hazard: survival is essentially impossible
        params = _device(theta=5.0, kill=50.0)
        for sid in range(50):
            outcome = simulate_device(derive_stream(12, sid), params)
            assert not outcome.survived_horizon
            assert outcome.present_loss == 0.0

    def test_zero_daily_loss(self):
        params = _device(theta=5.0, b=0.0)
        for sid in range(20):
            assert simulate_device(derive_stream(13, sid), params).present_loss == 0.0

    def test_cap_at_horizon(self):
        params = _device(theta=4.0, lam=400.0, horizon=365)
        seen_cap = False
        for sid in range(40):
            outcome = simulate_device(derive_stream(14, sid), params)
            expected = min(outcome.loss_days, 365) * 1000 / 1.03
            assert outcome.present_loss == pytest.approx(expected, rel=1e-12)
            seen_cap = seen_cap or outcome.loss_days > 365
        assert seen_cap

    def test_survival_probability(self):
        # survival draw matches exp(-kill_rate) empirically
        params = _device(theta=0.5, kill=0.7)
        survived = sum(
            simulate_device(derive_stream(15, sid), params).survived_horizon
            for sid in range(4000)
        )
        assert abs(survived / 4000 - math.exp(-0.7)) < 0.025


class TestPremiumSchedule:
    def test_no_mitigation(self):
        s = premium_schedule(1000.0, 0.1, 1.0)
        assert s.premium == pytest.approx(1100.0)
        assert s.adjusted_premium == pytest.approx(1100.0)
        assert s.adjusted_expected_loss == 1000.0

    def test_paper_note_values(self):
        s = premium_schedule(1000.0, 0.1, 0.9)
        assert s.adjusted_expected_loss == pytest.approx(900.0)
        assert s.adjusted_premium == pytest.approx(990.0)

    def test_zero_expected_loss(self):
        s = premium_schedule(0.0, 0.3, 0.5)
        assert s.premium == 0.0 and s.adjusted_premium == 0.0 and s.adjusted_expected_loss == 0.0

    def test_identities_tight(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            e = float(rng.uniform(0, 1e7))
            d = float(rng.uniform(0, 2))
            a = float(rng.uniform(0.01, 1.0))
            s = premium_schedule(e, d, a)
            # identities hold to a few ulp
            assert s.premium == pytest.approx((1 + d) * e, rel=4e-16)
            assert s.adjusted_expected_loss == pytest.approx(a * e, rel=4e-16)
            assert s.adjusted_premium == pytest.approx((1 + d) * a * e, rel=8e-16)

    def test_domain(self):
        with pytest.raises(DomainError):
            premium_schedule(100.0, 0.1, 0.0)
        with pytest.raises(DomainError):
            premium_schedule(100.0, 0.1, 1.5)
        with pytest.raises(DomainError):
            premium_schedule(-1.0, 0.1, 0.5)


class TestAggregateLoss:
    def test_zero_rate(self):
        params = AggregateLossParams(event_rate=0.0, severity=Fixed(10.0))
        draws = simulate_aggregate_loss_batch(derive_stream(20, 0), params, 1000)
        assert (draws == 0.0).all()

    def test_wald_identity(self):
        params = AggregateLossParams(event_rate=3.0, severity=Fixed(2.0))
        draws = simulate_aggregate_loss_batch(derive_stream(20, 1), params, 1_000_000)
        assert abs(draws.mean() - 6.0) < 0.02

    @pytest.mark.parametrize("rate", [1.0, 2.0, 5.0])
    def test_panjer_oracle(self, rate):
        severity = DiscreteTable(values=(1.0, 2.0, 5.0, 10.0),
                                 probabilities=(0.4, 0.3, 0.2, 0.1))
        params = AggregateLossParams(event_rate=rate, severity=severity)
        draws = simulate_aggregate_loss_batch(derive_stream(20, 2 + int(rate)), params, 100_000)
        grid = np.arange(0.0, 80.0, 1.0)
        oracle_cdf = panjer_compound_poisson_cdf(rate, severity.values,
                                                 severity.probabilities, grid)
        empirical_cdf = np.searchsorted(np.sort(draws), grid, side="right") / len(draws)
        assert np.max(np.abs(empirical_cdf - oracle_cdf)) <= 0.01

    def test_scalar_degenerate(self):
        params = AggregateLossParams(event_rate=0.0, severity=Fixed(1.0))
        assert simulate_aggregate_loss(derive_stream(20, 9), params) == 0.0


class TestPortfolioLoss:
    def test_examples(self):
        assert portfolio_loss([], 0.0) == 0.0
        assert portfolio_loss([100.0, 200.0, 300.0], 50.0) == 650.0
        assert portfolio_loss([123.25]) == 123.25

    def test_permutation_invariance(self):
        rng = np.random.default_rng(8)
        values = list(rng.uniform(0, 1e6, size=50))
        base = portfolio_loss(values, 10.0)
        for _ in range(5):
            rng.shuffle(values)
            assert portfolio_loss(values, 10.0) == base  # fsum is order-exact

    def test_monotonicity(self):
        assert portfolio_loss([1.0, 2.0], 0.0) < portfolio_loss([1.0, 3.0], 0.0)
        assert portfolio_loss([1.0, 2.0], 0.0) < portfolio_loss([1.0, 2.0], 1.0)


class TestExpectedLoss:
    def test_capped_mean_matches_direct_sum(self):
        counts = CountDistributionParams(theta=2.0, lambda_cluster=1.5)
        from cyberrisk.distributions import compound_count_pmf

        horizon = 6
        direct = sum(min(n, horizon) * compound_count_pmf(n, counts) for n in range(200))
        assert expected_capped_loss_days(counts, horizon) == pytest.approx(direct, abs=1e-9)

    def test_no_cap_equals_wald_mean(self):
        counts = CountDistributionParams(theta=0.5, lambda_cluster=2.0)
        assert expected_capped_loss_days(counts, 10_000) == pytest.approx(counts.mean, rel=1e-9)

    def test_always_capped_regime(self):
        counts = CountDistributionParams(theta=400.0, lambda_cluster=10.0)
        assert expected_capped_loss_days(counts, 365) == 365.0

    def test_expected_present_loss_composition(self):
        dev = _device(theta=0.5, lam=2.0, b=100.0, r=0.0, kill=0.0, horizon=10_000)
        assert expected_present_loss(dev) == pytest.approx(100.0 * 1.5, rel=1e-9)
        dev_killed = _device(theta=0.5, lam=2.0, b=100.0, r=0.0, kill=0.7, horizon=10_000)
        assert expected_present_loss(dev_killed) == pytest.approx(
            100.0 * 1.5 * math.exp(-0.7), rel=1e-9)


class TestLinearity:
    def test_present_loss_linear_in_daily_loss(self):
        from dataclasses import replace

        base = _device(theta=3.0, horizon=100_000)
        tripled = replace(base, daily_loss=3000.0)
        for sid in range(30):
            a = simulate_device(derive_stream(30, sid), base)
            b = simulate_device(derive_stream(30, sid), tripled)
            assert b.loss_days == a.loss_days
            assert b.present_loss == pytest.approx(3.0 * a.present_loss, rel=1e-12)


class TestLossDayMultiplier:
    def test_default_is_one_attack_one_day(self):
        dev = _device(theta=3.0)
        assert dev.loss_day_multiplier == 1.0

    def test_multiplier_scales_sub_cap_losses(self):
        from dataclasses import replace

        base = _device(theta=3.0, horizon=100_000)
        doubled = replace(base, loss_day_multiplier=2.0)
        for sid in range(30):
            a = simulate_device(derive_stream(31, sid), base)
            b = simulate_device(derive_stream(31, sid), doubled)
            assert b.loss_days == a.loss_days
            assert b.present_loss == pytest.approx(2.0 * a.present_loss, rel=1e-12)

    def test_multiplier_respects_horizon_cap(self):
        from dataclasses import replace

        dev = replace(_device(theta=5.0, horizon=4), loss_day_multiplier=3.0)
        for sid in range(30):
            outcome = simulate_device(derive_stream(32, sid), dev)
            assert outcome.present_loss <= 4 * 1000 / 1.03 + 1e-9

    def test_expected_loss_uses_multiplier(self):
        from dataclasses import replace

        dev = replace(_device(theta=0.5, lam=2.0, r=0.0, horizon=10_000),
                      loss_day_multiplier=2.5)
        assert expected_present_loss(dev) == pytest.approx(1000.0 * 2.5 * 1.5, rel=1e-9)
