"""Expected shortfall, loss distributions, and minimal-injection search.

Injection optimality is checked against closed forms on deterministic
scenario sets (where the answer is paper-and-pencil computable) and
against dense grid scans in the scalar case.
"""

import numpy as np
import pytest

from gringotts import (ClearingParams, FinancialNetwork, InjectionCriterion,
                       ScenarioSet, ShockModel, clear_fictitious_default,
                       expected_shortfall, loss_distribution,
                       minimal_injection, minimal_injection_scalar,
                       sample_scenarios)
from gringotts.risk import _tail_count


def constant_scenarios(rows):
    """Scenario set with literal multiplier rows (no sampling)."""
    arr = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    return ScenarioSet(arr, seed=0, model=ShockModel())


class TestExpectedShortfall:
    def test_hand_values(self):
        assert expected_shortfall(np.arange(10.0), 0.2) == pytest.approx(8.5)
        assert expected_shortfall([1.0, 2.0, 3.0], 0.05) == 3.0
        assert expected_shortfall([4.0] * 50, 0.1) == 4.0

    def test_exact_product_tail_count(self):
        # 0.05 * 100 must select exactly 5 observations despite float fuzz
        losses = np.arange(100.0)
        assert expected_shortfall(losses, 0.05) == pytest.approx(97.0)
        assert _tail_count(0.05, 100) == 5
        assert _tail_count(0.01, 10_000) == 100
        assert _tail_count(0.1, 10_000) == 1000

    def test_small_tails_round_up(self):
        assert _tail_count(0.05, 10) == 1
        assert _tail_count(0.34, 3) == 2
        assert _tail_count(0.333, 3) == 1

    def test_order_invariance(self, rng):
        losses = rng.uniform(0, 100, 997)
        shuffled = losses.copy()
        rng.shuffle(shuffled)
        assert expected_shortfall(losses, 0.07) == pytest.approx(
            expected_shortfall(shuffled, 0.07), rel=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            expected_shortfall([], 0.1)
        with pytest.raises(ValueError):
            expected_shortfall([1.0], 0.0)
        with pytest.raises(ValueError):
            expected_shortfall([1.0], 1.0)


class TestCriterion:
    def test_validation(self):
        with pytest.raises(ValueError):
            InjectionCriterion(level=0.0, threshold=1.0)
        with pytest.raises(ValueError):
            InjectionCriterion(level=1.0, threshold=1.0)
        with pytest.raises(ValueError):
            InjectionCriterion(level=0.5, threshold=-1.0)
        with pytest.raises(ValueError):
            InjectionCriterion(level=0.5, threshold=float("nan"))
        InjectionCriterion(level=0.5, threshold=float("inf"))


class TestLossDistribution:
    def test_matches_scenario_by_scenario_clearing(self, split_net,
                                                   default_params):
        scen = sample_scenarios(ShockModel(), 5, 64, seed=21)
        losses = loss_distribution(split_net, scen, default_params)
        for s in (0, 7, 31, 63):
            out = clear_fictitious_default(
                split_net, split_net.external_assets * scen.multipliers[s],
                default_params)
            assert losses[s] == pytest.approx(out.societal_loss, rel=1e-12,
                                              abs=1e-6)

    def test_monopoly_common_random_numbers(self, split_net, mono_net,
                                            default_params):
        scen = sample_scenarios(ShockModel(), 5, 32, seed=4)
        losses = loss_distribution(mono_net, scen, default_params,
                                   base_assets=split_net.external_assets)
        for s in (0, 5, 31):
            shocked = float(split_net.external_assets @ scen.multipliers[s])
            out = clear_fictitious_default(mono_net, [shocked], default_params)
            assert losses[s] == pytest.approx(out.societal_loss, rel=1e-12,
                                              abs=1e-6)

    def test_injection_reduces_losses_pointwise(self, split_net,
                                                default_params):
        scen = sample_scenarios(ShockModel(), 5, 200, seed=8)
        base = loss_distribution(split_net, scen, default_params)
        helped = loss_distribution(split_net, scen, default_params,
                                   injection=np.full(5, 2e6))
        assert np.all(helped <= base + 1e-6)
        assert helped.sum() < base.sum()

    def test_exempt_injection_beats_exposed(self, split_net, default_params):
        scen = sample_scenarios(ShockModel(), 5, 200, seed=8)
        k = np.full(5, 3e6)
        exempt = loss_distribution(split_net, scen, default_params,
                                   injection=k)
        exposed = loss_distribution(split_net, scen, default_params,
                                    injection=k, injection_shock_exempt=False)
        assert np.all(exposed >= exempt - 1e-6)

    def test_exposed_monopoly_weighting(self, split_net, mono_net,
                                        default_params):
        scen = sample_scenarios(ShockModel(), 5, 16, seed=13)
        k = 5e6
        losses = loss_distribution(mono_net, scen, default_params,
                                   injection=[k],
                                   base_assets=split_net.external_assets,
                                   injection_shock_exempt=False)
        e = split_net.external_assets
        for s in (0, 9, 15):
            mult = float(e @ scen.multipliers[s]) / e.sum()
            out = clear_fictitious_default(
                mono_net, [float(e @ scen.multipliers[s]) + k * mult],
                default_params)
            assert losses[s] == pytest.approx(out.societal_loss, rel=1e-12,
                                              abs=1e-6)

    def test_shape_guards(self, split_net, mono_net, default_params):
        scen = sample_scenarios(ShockModel(), 5, 8, seed=1)
        with pytest.raises(ValueError, match="base_assets"):
            loss_distribution(mono_net, scen, default_params)
        three = sample_scenarios(ShockModel(), 3, 8, seed=1)
        with pytest.raises(ValueError, match="bank columns"):
            loss_distribution(split_net, three, default_params)
        with pytest.raises(ValueError, match="shape"):
            loss_distribution(split_net, scen, default_params,
                              injection=np.zeros(3))
        with pytest.raises(ValueError, match="non-negative"):
            loss_distribution(split_net, scen, default_params,
                              injection=np.full(5, -1.0))


class TestScalarInjection:
    def test_deterministic_closed_form(self, mono_net, split_net, calib,
                                       default_params):
        # X = 0.3 for every split bank: the only way to meet a 1%-of-GDP
        # tail cap is full solvency, so k* = p̄ - 0.3 * assets
        scen = constant_scenarios([np.full(5, 0.3)])
        crit = InjectionCriterion(0.05, calib.loss_threshold_galleons)
        res = minimal_injection_scalar(mono_net, scen, default_params, crit,
                                       base_assets=split_net.external_assets)
        expected = (mono_net.total_obligations[0]
                    - 0.3 * split_net.external_assets.sum())
        assert res.total == pytest.approx(expected, abs=200.0)
        assert res.achieved_tail_loss <= crit.threshold + 200.0
        assert res.scenario_count == 1

    def test_against_grid_scan(self, mono_net, split_net, calib,
                               default_params):
        scen = sample_scenarios(ShockModel(), 5, 400, seed=77)
        crit = InjectionCriterion(0.05, calib.loss_threshold_galleons)
        res = minimal_injection_scalar(mono_net, scen, default_params, crit,
                                       base_assets=split_net.external_assets)
        slack = 1e-6 * split_net.external_assets.sum()
        grid = np.linspace(0.0, mono_net.total_obligations[0], 2001)
        feasible = [k for k in grid
                    if expected_shortfall(
                        loss_distribution(
                            mono_net, scen, default_params, injection=[k],
                            base_assets=split_net.external_assets),
                        crit.level) <= crit.threshold + slack]
        spacing = grid[1] - grid[0]
        assert res.total <= feasible[0] + spacing
        assert res.total >= feasible[0] - spacing

    def test_zero_when_already_safe(self, mono_net, split_net,
                                    default_params):
        scen = constant_scenarios([np.ones(5)])
        crit = InjectionCriterion(0.05, 1e12)
        res = minimal_injection_scalar(mono_net, scen, default_params, crit,
                                       base_assets=split_net.external_assets)
        assert res.total == 0.0
        assert res.evaluations >= 1

    def test_needs_single_bank(self, split_net, default_params):
        scen = constant_scenarios([np.ones(5)])
        with pytest.raises(ValueError, match="single-bank"):
            minimal_injection_scalar(split_net, scen, default_params,
                                     InjectionCriterion(0.05, 1.0))

    def test_exposed_injection_can_be_infeasible(self, mono_net, split_net,
                                                 default_params):
        # invested (non-exempt) capital is shocked too; at X=0.3 even the
        # full-obligation budget cannot restore solvency
        scen = constant_scenarios([np.full(5, 0.3)])
        crit = InjectionCriterion(0.05, 0.0)
        with pytest.raises(RuntimeError):
            minimal_injection_scalar(mono_net, scen, default_params, crit,
                                     base_assets=split_net.external_assets,
                                     injection_shock_exempt=False)

    def test_deterministic_repeat(self, mono_net, split_net, calib,
                                  default_params):
        scen = sample_scenarios(ShockModel(), 5, 300, seed=5)
        crit = InjectionCriterion(0.1, calib.loss_threshold_galleons)
        a = minimal_injection_scalar(mono_net, scen, default_params, crit,
                                     base_assets=split_net.external_assets)
        b = minimal_injection_scalar(mono_net, scen, default_params, crit,
                                     base_assets=split_net.external_assets)
        assert a.total == b.total
        assert a.allocation.tobytes() == b.allocation.tobytes()


class TestSimplexInjection:
    def test_baseline_structural_gap(self, split_net, calib, default_params):
        # with no shock at all, one institution still cannot cover its
        # obligations; the cheapest fix tops up exactly its funding gap
        scen = constant_scenarios([np.ones(5)])
        crit = InjectionCriterion(0.05, calib.loss_threshold_galleons)
        res = minimal_injection(split_net, scen, default_params, crit)
        gap = 0.03 * calib.gdp_galleons
        assert res.total == pytest.approx(gap, abs=200.0)
        assert res.allocation[0] == pytest.approx(gap, abs=200.0)
        assert res.achieved_tail_loss <= crit.threshold + 200.0

    def test_two_bank_closed_form(self):
        # A owes society 5 with shocked assets 2 (alpha 0.9): the tail cap
        # 0.5 is only reachable at full solvency, k_A = 3; B needs nothing
        net = FinancialNetwork(("A", "B"), [10.0, 5.0],
                               [[0.0, 0.0, 5.0], [0.0, 0.0, 5.0]])
        scen = constant_scenarios([[0.2, 1.0]])
        params = ClearingParams(alpha=0.9, beta=0.9)
        res = minimal_injection(net, scen, params,
                                InjectionCriterion(0.5, 0.5))
        assert res.total == pytest.approx(3.0, abs=1e-3)
        assert res.allocation[0] == pytest.approx(3.0, abs=1e-2)
        assert res.allocation[1] <= 1e-2

    def test_feasibility_and_monotone_levels(self, split_net, calib,
                                             default_params):
        scen = sample_scenarios(ShockModel(), 5, 500, seed=31)
        slack = 1e-6 * split_net.external_assets.sum()
        totals = []
        for level in (0.01, 0.05, 0.10):
            crit = InjectionCriterion(level, calib.loss_threshold_galleons)
            res = minimal_injection(split_net, scen, default_params, crit)
            assert res.achieved_tail_loss <= crit.threshold + slack
            achieved = expected_shortfall(
                loss_distribution(split_net, scen, default_params,
                                  injection=res.allocation), level)
            assert achieved == pytest.approx(res.achieved_tail_loss,
                                             rel=1e-9)
            totals.append(res.total)
        # a tighter tail (smaller q) can only cost more, up to the
        # bisection bracket width
        wiggle = 2e-6 * split_net.external_assets.sum()
        assert totals[0] >= totals[1] - wiggle
        assert totals[1] >= totals[2] - wiggle

    def test_zero_when_already_safe(self, split_net, default_params):
        scen = constant_scenarios([np.ones(5)])
        res = minimal_injection(split_net, scen, default_params,
                                InjectionCriterion(0.05, 1e12))
        assert res.total == 0.0

    def test_infeasible_target_raises(self, split_net, default_params):
        # even unlimited exempt capital cannot stop the recovery haircut
        # on an un-fundable bank... but full funding always clears exempt
        # injections, so force infeasibility through the exposed mode
        scen = constant_scenarios([np.full(5, 0.05)])
        with pytest.raises(RuntimeError):
            minimal_injection(split_net, scen, default_params,
                              InjectionCriterion(0.5, 0.0),
                              injection_shock_exempt=False)

    def test_deterministic_repeat(self, split_net, calib, default_params):
        scen = sample_scenarios(ShockModel(), 5, 400, seed=99)
        crit = InjectionCriterion(0.1, calib.loss_threshold_galleons)
        a = minimal_injection(split_net, scen, default_params, crit)
        b = minimal_injection(split_net, scen, default_params, crit)
        assert a.total == b.total
        assert a.allocation.tobytes() == b.allocation.tobytes()

    def test_monopoly_needs_no_more_than_split(self, split_net, mono_net,
                                               calib, default_params):
        scen = sample_scenarios(ShockModel(), 5, 600, seed=17)
        crit = InjectionCriterion(0.05, calib.loss_threshold_galleons)
        split_res = minimal_injection(split_net, scen, default_params, crit)
        mono_res = minimal_injection_scalar(
            mono_net, scen, default_params, crit,
            base_assets=split_net.external_assets)
        assert mono_res.total <= split_res.total + 1.0

    def test_result_metadata(self, split_net, calib, default_params):
        scen = sample_scenarios(ShockModel(), 5, 128, seed=2)
        crit = InjectionCriterion(0.05, calib.loss_threshold_galleons)
        res = minimal_injection(split_net, scen, default_params, crit)
        assert res.scenario_count == 128
        assert res.evaluations > 0
        data = res.to_dict()
        assert set(data) == {"allocation", "total", "achieved_tail_loss",
                             "level", "threshold", "scenarios", "evaluations"}
        assert data["total"] == pytest.approx(sum(data["allocation"]))

    def test_certificate_never_exceeds_answer(self, split_net, calib,
                                              default_params):
        from gringotts.risk import _TailEvaluator
        scen = sample_scenarios(ShockModel(), 5, 300, seed=55)
        crit = InjectionCriterion(0.05, calib.loss_threshold_galleons)
        res = minimal_injection(split_net, scen, default_params, crit)
        ev = _TailEvaluator(split_net, scen, default_params, q=crit.level)
        slack = 1e-6 * ev.scale
        certified = ev.certified_infeasible_total(crit.threshold, slack)
        assert certified <= res.total + 1e-6 * ev.scale
