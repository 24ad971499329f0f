"""Deterministic discrete-event simulation of a botnet campaign.

One victim sits behind a bottleneck link and a ring of inline defenders.
The attacker fields a fresh bot cohort at every attack-on window and
replaces neutralized bots after a short recruitment delay; defenders
classify traffic, filter identified bot flows, and escalate alarms to pull
peer and coordinator capacity into the fight. Headline metrics
(utilization, benign delay, cancellation) are conditioned on attack-on
windows, which is where the published curves are read.
"""
from __future__ import annotations

import heapq
import itertools
import json
import math
import random
from dataclasses import dataclass, field, replace
from decimal import Decimal

import numpy as np

from . import costs, pipeline, protocol
from .costs import BotnetQuote, CostParams
from .dynamics import ModelParams, PopulationState
from .protocol import (
    AlarmLevel,
    AlarmMonitor,
    CoordinatorState,
    DefenderProfile,
    evaluate_alarm,
    propagate_update,
    register,
)


class SimulationError(ValueError):
    pass


class ConfigurationError(SimulationError):
    pass


@dataclass(frozen=True)
class AttackScenario:
    """Frozen description of one campaign run."""

    bot_count: int = 400
    bots_per_lan: int = 16
    benign_tit: float = 10.0          # mean benign transaction interarrival, s
    malicious_tit: float = 0.3        # mean bot transaction interarrival, s
    attack_period: float = 300.0      # attack-on/off cadence, s
    duration: float = 2400.0          # total simulated time, s
    link_capacity: float = 10_000_000.0   # bottleneck, bits/s
    request_timeout: float = 4.0      # benign request cancellation threshold, s
    defender_count: int = 1
    seed: int = 42
    # calibration knobs (frozen in the shipped scenario file)
    malicious_packet_bits: float = 11_250.0
    benign_request_bits: float = 220_000.0
    detection_mean: float = 180.0     # single-defender mean time to neutralize a bot, s
    replace_delay: float = 1.0        # attacker recruitment delay per killed bot, s
    attacker_replaces: bool = True
    metric_interval: float = 1.0
    saturation_onset: float = 0.9     # offered/capacity ratio where goodput decays
    saturation_penalty: float = 0.7   # goodput efficiency slope past the onset
    peer_join_delay: float = 0.0      # peers refuse offloads before this time, s

    def __post_init__(self):
        if self.bot_count < 0:
            raise ConfigurationError(f"bot_count must be >= 0, got {self.bot_count}")
        if self.bots_per_lan <= 0:
            raise ConfigurationError("bots_per_lan must be positive")
        if self.defender_count < 1:
            raise ConfigurationError("defender_count must be >= 1")
        for name in ("benign_tit", "malicious_tit", "attack_period", "duration",
                     "link_capacity", "request_timeout", "detection_mean",
                     "metric_interval"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be positive")
        if self.replace_delay < 0 or self.peer_join_delay < 0:
            raise ConfigurationError("delays must be >= 0")


@dataclass(frozen=True)
class GridTopology:
    """Defender placement: one victim-side defender plus inline peers."""

    defenders: tuple[DefenderProfile, ...]
    victim_id: str
    coordinator_units: float = 0.0
    stale_timeout: float = 600.0

    def __post_init__(self):
        ids = [d.id for d in self.defenders]
        if len(set(ids)) != len(ids):
            raise ConfigurationError("duplicate defender ids in topology")
        if self.victim_id not in ids:
            raise ConfigurationError(
                f"victim {self.victim_id!r} has no inline defender"
            )

    @property
    def victim_defender(self) -> DefenderProfile:
        return next(d for d in self.defenders if d.id == self.victim_id)

    @property
    def peers(self) -> tuple[DefenderProfile, ...]:
        return tuple(d for d in self.defenders if d.id != self.victim_id)


def build_topology(
    defender_count: int,
    filter_capacity: float,
    coordinator_units: float = 0.0,
) -> GridTopology:
    """Uniform topology: ``defender_count`` defenders of equal filtering power."""
    defenders = tuple(
        DefenderProfile(
            id=f"d{i}",
            defense_capacity=filter_capacity,
            spare_capacity=filter_capacity,
            certificate=f"cert-d{i}",
        )
        for i in range(defender_count)
    )
    return GridTopology(defenders=defenders, victim_id="d0",
                        coordinator_units=coordinator_units)


# Deterministic tie-break ranks; events at equal times run in this order.
_EVENT_RANK = {
    "attack_toggle": 0,
    "bot_detected": 1,
    "bot_replaced": 2,
    "alarm_evaluation": 3,
    "metric_sample": 4,
    "flow_arrival": 5,
    "service_complete": 6,
    "timeout": 7,
}


@dataclass
class MetricsReport:
    """Aggregated outputs of one run."""

    defender_count: int
    seed: int
    mean_utilization: float
    utilization_series: list[tuple[float, float]]
    benign_delay_mean: float
    delay_series: list[tuple[float, float]]
    cancellation_rate: float
    attacker_expense: float
    active_bot_series: list[tuple[float, int]]
    engaged_units_series: list[tuple[float, int]]
    alarm_series: list[tuple[float, int]]
    requests_issued: int
    requests_cancelled: int
    bots_neutralized: int
    message_trace: str = ""

    def to_dict(self) -> dict:
        return {
            "defender_count": self.defender_count,
            "seed": self.seed,
            "mean_utilization": self.mean_utilization,
            "benign_delay_mean": self.benign_delay_mean,
            "cancellation_rate": self.cancellation_rate,
            "attacker_expense": self.attacker_expense,
            "requests_issued": self.requests_issued,
            "requests_cancelled": self.requests_cancelled,
            "bots_neutralized": self.bots_neutralized,
            "utilization_series": self.utilization_series,
            "delay_series": self.delay_series,
            "active_bot_series": self.active_bot_series,
            "engaged_units_series": self.engaged_units_series,
            "alarm_series": self.alarm_series,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _goodput_fraction(offered_ratio: float, onset: float, penalty: float) -> float:
    """Link goodput as a fraction of capacity, monotone in offered load.

    Past the onset ratio, contention losses eat into goodput linearly,
    bottoming out at 1 - penalty*(1 - onset) under full saturation.
    """
    served = min(offered_ratio, 1.0)
    overload = min(max(offered_ratio - onset, 0.0), 1.0 - onset)
    return served * (1.0 - penalty * overload)


class _Run:
    """Single-run event loop; shares nothing with other runs."""

    def __init__(self, scenario: AttackScenario, topology: GridTopology,
                 cost: CostParams, quote: BotnetQuote):
        if scenario.defender_count != len(topology.defenders):
            raise ConfigurationError(
                f"scenario wants {scenario.defender_count} defenders, topology "
                f"has {len(topology.defenders)}"
            )
        self.scenario = scenario
        self.topology = topology
        self.cost = cost
        self.quote = quote
        self.rng = random.Random(scenario.seed)

        self.heap: list = []
        self.seq = itertools.count()
        self.now = 0.0

        self.coordinator = CoordinatorState(
            allocatable_units=topology.coordinator_units
        )
        for profile in topology.defenders:
            register(self.coordinator, profile)
        self.monitor = AlarmMonitor()

        self.window_on = False
        self.window_index = -1
        self.active_bots: dict[str, float] = {}   # bot id -> activation time
        self.bot_ids = itertools.count()
        self.expense = Decimal(0)
        self.kills = 0

        # current-tick link state, refreshed by alarm evaluations
        self.residual_mal = 0.0
        self.offered_ratio = 0.0
        self.rationed = False
        self.engaged_count = 1

        self.issued = 0
        self.issued_on_window = 0
        self.cancelled_on_window = 0
        self.delays_on_window: list[float] = []

        self.util_series: list[tuple[float, float]] = []
        self.delay_series: list[tuple[float, float]] = []
        self.active_series: list[tuple[float, int]] = []
        self.engaged_series: list[tuple[float, int]] = []
        self.alarm_series: list[tuple[float, int]] = []
        self.util_on_sum = 0.0
        self.util_on_count = 0

    # -- event plumbing ---------------------------------------------------

    def schedule(self, time: float, kind: str, payload=None):
        heapq.heappush(
            self.heap, (time, _EVENT_RANK[kind], next(self.seq), kind, payload)
        )

    def execute(self) -> MetricsReport:
        s = self.scenario
        self.schedule(0.0, "attack_toggle")
        self.schedule(0.0, "alarm_evaluation")
        self.schedule(0.0, "metric_sample")
        self.schedule(self.rng.expovariate(1.0 / s.benign_tit), "flow_arrival")

        while self.heap:
            time, _, _, kind, payload = heapq.heappop(self.heap)
            if time > s.duration:
                break
            self.now = time
            getattr(self, "_on_" + kind)(payload)

        return self._report()

    # -- attacker ---------------------------------------------------------

    def _on_attack_toggle(self, _):
        s = self.scenario
        self.window_on = not self.window_on
        if self.window_on:
            self.window_index += 1
            for _ in range(s.bot_count):
                self._activate_bot()
        else:
            # cohort disbands; survivors are billed for their window time
            for bot_id, activated in self.active_bots.items():
                self._bill_bot(self.now - activated)
            self.active_bots.clear()
        self.schedule(self.now + s.attack_period, "attack_toggle")

    def _activate_bot(self):
        s = self.scenario
        bot_id = f"w{self.window_index}b{next(self.bot_ids)}"
        self.active_bots[bot_id] = self.now
        lifetime = self.rng.expovariate(s.defender_count / s.detection_mean)
        self.schedule(self.now + lifetime, "bot_detected", bot_id)

    def _bill_bot(self, active_time: float):
        active_time = max(active_time, 1e-9)
        self.expense += costs.bot_cost(self.quote, active_time)

    def _on_bot_detected(self, bot_id):
        activated = self.active_bots.pop(bot_id, None)
        if activated is None or not self.window_on:
            return
        self.kills += 1
        self._bill_bot(self.now - activated)
        propagate_update(
            self.coordinator,
            source_address=bot_id,
            victim_address=self.topology.victim_id,
            origin=self.topology.victim_id,
            path=(self.topology.victim_id,),
            now=self.now,
        )
        if self.scenario.attacker_replaces:
            self.schedule(self.now + self.scenario.replace_delay, "bot_replaced")

    def _on_bot_replaced(self, _):
        if self.window_on:
            self._activate_bot()

    # -- defense posture --------------------------------------------------

    def _on_alarm_evaluation(self, _):
        s = self.scenario
        offered_mal = len(self.active_bots) * s.malicious_packet_bits / s.malicious_tit
        victim = self.topology.victim_defender
        peers_available = self.now >= s.peer_join_delay
        peer_spare = (
            sum(p.spare_capacity for p in self.topology.peers)
            if peers_available
            else 0.0
        )
        local_power = victim.defense_capacity + s.link_capacity
        target, _actions = evaluate_alarm(
            offered_mal, local_power, peer_spare, self.topology.coordinator_units
        )
        level = self.monitor.step(target)

        engaged_filter = victim.defense_capacity
        self.engaged_count = 1
        if level >= AlarmLevel.LOCAL and peers_available:
            engaged_filter += sum(p.defense_capacity for p in self.topology.peers)
            self.engaged_count += len(self.topology.peers)
        if target == AlarmLevel.REGIONAL:
            excess = max(offered_mal - local_power - peer_spare, 0.0)
            engaged_filter += min(self.topology.coordinator_units, excess)

        benign_rate = s.benign_request_bits / s.benign_tit
        self.residual_mal = max(offered_mal - engaged_filter, 0.0)
        self._police_tick(offered_mal, benign_rate)
        self.offered_ratio = (self.residual_mal + benign_rate) / s.link_capacity
        self.rationed = self.offered_ratio > 1.0
        self.schedule(self.now + s.metric_interval, "alarm_evaluation")

    def _police_tick(self, offered_mal: float, benign_rate: float):
        """Classify and police this tick's aggregate flows at the filter stage.

        Identified bot traffic (up to the engaged filtering power) is marked
        malicious and dropped; everything unidentified, benign client
        included, looks like plain uncertain HTTP here. Priority marking is
        not deployed between client and victim in this testbed, so the
        filter stage polices without alarm-driven L limits.
        """
        s = self.scenario
        identified = offered_mal - self.residual_mal
        flows = []
        if identified > 0:
            flows.append(
                pipeline.classify(
                    source="botnet", destination=self.topology.victim_id,
                    offered_rate=identified / s.malicious_packet_bits,
                    size_bits=s.malicious_packet_bits,
                    bot_knowledge={"botnet"},
                )
            )
        if self.residual_mal > 0:
            flows.append(
                pipeline.classify(
                    source="unknown", destination=self.topology.victim_id,
                    offered_rate=self.residual_mal / s.malicious_packet_bits,
                    size_bits=s.malicious_packet_bits,
                )
            )
        flows.append(
            pipeline.classify(
                source="client", destination=self.topology.victim_id,
                offered_rate=benign_rate / s.benign_request_bits,
                size_bits=s.benign_request_bits,
            )
        )
        self.last_policing = pipeline.police(
            flows, link_capacity=max(s.link_capacity, offered_mal + benign_rate)
        )

    def _on_metric_sample(self, _):
        s = self.scenario
        util = _goodput_fraction(
            self.offered_ratio, s.saturation_onset, s.saturation_penalty
        )
        self.util_series.append((self.now, util))
        self.active_series.append((self.now, len(self.active_bots)))
        self.engaged_series.append((self.now, self.engaged_count))
        self.alarm_series.append((self.now, int(self.monitor.level)))
        if self.window_on:
            self.util_on_sum += util
            self.util_on_count += 1
        self.schedule(self.now + s.metric_interval, "metric_sample")

    # -- benign client ----------------------------------------------------

    def _benign_response_time(self) -> float:
        s = self.scenario
        benign_rate = s.benign_request_bits / s.benign_tit
        if self.rationed:
            total = self.residual_mal + benign_rate
            bandwidth = s.link_capacity * benign_rate / total
            return s.benign_request_bits / bandwidth
        rho = min(self.offered_ratio, 0.999999)
        return (s.benign_request_bits / s.link_capacity) / (1.0 - rho)

    def _on_flow_arrival(self, _):
        s = self.scenario
        self.issued += 1
        in_window = self.window_on
        if in_window:
            self.issued_on_window += 1
        response = self._benign_response_time()
        if response > s.request_timeout:
            if in_window:
                self.cancelled_on_window += 1
                # censored at the timeout for delay accounting
                self.delays_on_window.append(s.request_timeout)
            self.schedule(self.now + s.request_timeout, "timeout")
        else:
            self.schedule(self.now + response, "service_complete",
                          (response, in_window))
        self.schedule(
            self.now + self.rng.expovariate(1.0 / s.benign_tit), "flow_arrival"
        )

    def _on_service_complete(self, payload):
        response, in_window = payload
        if in_window:
            self.delays_on_window.append(response)
        self.delay_series.append((self.now, response))

    def _on_timeout(self, _):
        self.delay_series.append((self.now, self.scenario.request_timeout))

    # -- reporting --------------------------------------------------------

    def _report(self) -> MetricsReport:
        mean_util = (
            self.util_on_sum / self.util_on_count if self.util_on_count else 0.0
        )
        delay_mean = (
            sum(self.delays_on_window) / len(self.delays_on_window)
            if self.delays_on_window
            else 0.0
        )
        cancellation = (
            self.cancelled_on_window / self.issued_on_window
            if self.issued_on_window
            else 0.0
        )
        return MetricsReport(
            defender_count=self.scenario.defender_count,
            seed=self.scenario.seed,
            mean_utilization=mean_util,
            utilization_series=self.util_series,
            benign_delay_mean=delay_mean,
            delay_series=self.delay_series,
            cancellation_rate=cancellation,
            attacker_expense=float(self.expense),
            active_bot_series=self.active_series,
            engaged_units_series=self.engaged_series,
            alarm_series=self.alarm_series,
            requests_issued=self.issued,
            requests_cancelled=self.cancelled_on_window,
            bots_neutralized=self.kills,
            message_trace=protocol.format_trace(self.coordinator.outbox[:200]),
        )


def run(
    scenario: AttackScenario,
    topology: GridTopology,
    cost: CostParams,
    quote: BotnetQuote,
) -> MetricsReport:
    """Execute one deterministic campaign run."""
    return _Run(scenario, topology, cost, quote).execute()


def sweep(
    scenario: AttackScenario,
    defender_counts,
    seeds,
    cost: CostParams,
    quote: BotnetQuote,
    filter_capacity: float,
    coordinator_units: float = 0.0,
) -> list[MetricsReport]:
    """Cartesian product of runs over defender counts and seeds.

    Runs share nothing mutable; results are ordered by (defender_count,
    seed) declaration order.
    """
    if not defender_counts or not seeds:
        raise ConfigurationError("defender_counts and seeds must be non-empty")
    reports = []
    for count in defender_counts:
        topology = build_topology(count, filter_capacity, coordinator_units)
        for seed in seeds:
            variant = replace(scenario, defender_count=count, seed=seed)
            reports.append(run(variant, topology, cost, quote))
    return reports


def couple_populations(report: MetricsReport) -> list[PopulationState]:
    """Empirical (defending units, active attackers) series from one run."""
    series = []
    for (t, engaged), (_, active) in zip(
        report.engaged_units_series, report.active_bot_series
    ):
        series.append(PopulationState(float(engaged), float(active), t))
    return series


def fit_model_params(series: list[PopulationState]) -> ModelParams:
    """Least-squares fit of interaction constants to an empirical series.

    Uses the linear-in-parameters form of the per-capita growth rates;
    exploratory output, not an asserted reconstruction.
    """
    if len(series) < 4:
        raise SimulationError("need at least 4 samples to fit")
    t = np.array([s.t for s in series])
    u = np.array([max(s.num_unit, 1e-9) for s in series])
    a = np.array([max(s.num_actv, 1e-9) for s in series])
    du = np.gradient(u, t)
    da = np.gradient(a, t)

    # du/u = alpha - beta*a  ;  da/a = delta*u - gamma
    x1 = np.column_stack([np.ones_like(a), -a])
    alpha, beta = np.linalg.lstsq(x1, du / u, rcond=None)[0]
    x2 = np.column_stack([u, -np.ones_like(u)])
    delta, gamma = np.linalg.lstsq(x2, da / a, rcond=None)[0]
    floor = 1e-6
    return ModelParams(
        alpha=max(float(alpha), floor),
        beta=max(float(beta), floor),
        gamma=max(float(gamma), floor),
        delta=max(float(delta), floor),
    )
