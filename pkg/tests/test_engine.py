"""Simulation-engine tests: determinism, baselines, sweeps, model coupling."""
import math
from dataclasses import replace

import pytest

from gridshield import engine
from gridshield.costs import BotnetQuote, CostParams
from gridshield.engine import (
    AttackScenario,
    ConfigurationError,
    GridTopology,
    build_topology,
    couple_populations,
    fit_model_params,
)
from gridshield.dynamics import ModelParams, PopulationState, default_step, integrate
from gridshield.protocol import DefenderProfile

QUOTE = BotnetQuote(population=400_000, rental_price=20_000,
                    rental_period=14 * 24 * 3600.0, setup_per_bot=1)
COST = CostParams(mrt=3600.0)

SHORT = AttackScenario(duration=600.0, attack_period=150.0)


def _run(scenario, filter_capacity=1_775_000.0, coordinator_units=1_500_000.0):
    topology = build_topology(scenario.defender_count, filter_capacity,
                              coordinator_units)
    return engine.run(scenario, topology, COST, QUOTE)


class TestValidation:
    def test_negative_bot_count_rejected(self):
        with pytest.raises(ConfigurationError):
            AttackScenario(bot_count=-1)

    def test_zero_defenders_rejected(self):
        with pytest.raises(ConfigurationError):
            AttackScenario(defender_count=0)

    def test_scenario_topology_mismatch(self):
        topology = build_topology(3, 1_000_000.0)
        with pytest.raises(ConfigurationError):
            engine.run(AttackScenario(defender_count=2, duration=10.0),
                       topology, COST, QUOTE)

    def test_victim_must_be_inline(self):
        defender = DefenderProfile("d1", 1.0, 1.0, certificate="c")
        with pytest.raises(ConfigurationError):
            GridTopology(defenders=(defender,), victim_id="d0")

    def test_duplicate_defender_ids_rejected(self):
        defender = DefenderProfile("d0", 1.0, 1.0, certificate="c")
        with pytest.raises(ConfigurationError):
            GridTopology(defenders=(defender, defender), victim_id="d0")


class TestBaselines:
    def test_no_attack_leaves_link_idle(self):
        report = _run(replace(SHORT, bot_count=0))
        benign_ratio = (SHORT.benign_request_bits / SHORT.benign_tit
                        / SHORT.link_capacity)
        assert report.mean_utilization == pytest.approx(benign_ratio, rel=1e-6)
        assert report.cancellation_rate == 0.0
        assert report.attacker_expense == 0.0
        assert report.bots_neutralized == 0

    def test_no_attack_delay_is_lightly_loaded_service_time(self):
        report = _run(replace(SHORT, bot_count=0))
        base = SHORT.benign_request_bits / SHORT.link_capacity
        assert base < report.benign_delay_mean < 2 * base

    def test_bots_drive_cancellations_for_lone_defender(self):
        report = _run(replace(SHORT, defender_count=1))
        assert report.cancellation_rate > 0.5
        assert report.attacker_expense > 0.0
        assert report.bots_neutralized > 0

    def test_active_bots_zero_in_off_windows(self):
        report = _run(SHORT)
        by_time = dict(report.active_bot_series)
        assert by_time[200.0] == 0
        assert by_time[100.0] > 0


class TestDeterminism:
    def test_identical_seeds_identical_reports(self):
        a = _run(replace(SHORT, seed=7))
        b = _run(replace(SHORT, seed=7))
        assert a.to_json() == b.to_json()

    def test_different_seeds_differ(self):
        a = _run(replace(SHORT, seed=7))
        b = _run(replace(SHORT, seed=8))
        assert a.to_json() != b.to_json()


class TestSweep:
    def test_cardinality_and_order(self):
        reports = engine.sweep(
            replace(SHORT, duration=300.0), [1, 2], [5, 6], COST, QUOTE,
            filter_capacity=1_775_000.0,
        )
        assert [(r.defender_count, r.seed) for r in reports] == [
            (1, 5), (1, 6), (2, 5), (2, 6)
        ]

    def test_empty_axis_rejected(self):
        with pytest.raises(ConfigurationError):
            engine.sweep(SHORT, [], [1], COST, QUOTE, filter_capacity=1.0)
        with pytest.raises(ConfigurationError):
            engine.sweep(SHORT, [1], [], COST, QUOTE, filter_capacity=1.0)

    def test_runs_share_no_state(self):
        scenario = replace(SHORT, duration=300.0)
        alone = _run(replace(scenario, seed=5))
        swept = engine.sweep(scenario, [1], [5], COST, QUOTE,
                             filter_capacity=1_775_000.0,
                             coordinator_units=1_500_000.0)
        assert swept[0].to_json() == alone.to_json()


class TestCouplePopulations:
    def test_series_shape_matches_samples(self):
        report = _run(SHORT)
        series = couple_populations(report)
        assert len(series) == len(report.active_bot_series)
        assert all(isinstance(s, PopulationState) for s in series)

    def test_slow_detection_keeps_population_flat(self):
        scenario = replace(SHORT, detection_mean=1e9, duration=140.0,
                           attack_period=150.0)
        series = couple_populations(_run(scenario))
        assert {s.num_actv for s in series} == {float(scenario.bot_count)}

    def test_no_replacement_population_decays(self):
        scenario = replace(SHORT, attacker_replaces=False, detection_mean=20.0,
                           duration=140.0, attack_period=150.0)
        series = couple_populations(_run(scenario))
        counts = [s.num_actv for s in series]
        assert counts[-1] < counts[0]
        assert all(b <= a for a, b in zip(counts, counts[1:]))


class TestFitModelParams:
    def test_recovers_constants_from_synthetic_orbit(self):
        truth = ModelParams(alpha=1.0, beta=0.5, gamma=0.8, delta=0.4)
        trajectory = integrate(truth, PopulationState(3.0, 1.0), 10.0,
                               default_step(truth))
        fitted = fit_model_params(list(trajectory)[::20])
        for name in ("alpha", "beta", "gamma", "delta"):
            assert getattr(fitted, name) == pytest.approx(
                getattr(truth, name), rel=0.05
            )

    def test_too_few_samples_rejected(self):
        with pytest.raises(engine.SimulationError):
            fit_model_params([PopulationState(1, 1, 0.0)] * 3)


class TestGoodput:
    def test_idle_link(self):
        assert engine._goodput_fraction(0.0, 0.9, 0.7) == 0.0

    def test_below_onset_tracks_offered_load(self):
        assert engine._goodput_fraction(0.5, 0.9, 0.7) == 0.5

    def test_saturated_cap(self):
        assert engine._goodput_fraction(4.0, 0.9, 0.7) == pytest.approx(0.93)

    def test_monotone_nondecreasing(self):
        points = [engine._goodput_fraction(r / 100, 0.9, 0.7)
                  for r in range(0, 500)]
        assert all(b >= a - 1e-12 for a, b in zip(points, points[1:]))
