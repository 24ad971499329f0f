"""Data plane: classification, marking, and per-tick policing.

Incoming flows are marked high-priority benign ('H', 100% legitimacy),
graded/uncertain lower priority ('L', 95/85/75), or malicious (dropped).
Policing admits classes in strictly descending legitimacy within the link
capacity; alarms tighten what the uncertain classes may consume.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from .protocol import AlarmLevel


class PipelineError(ValueError):
    pass


class TrafficClass(str, Enum):
    BENIGN = "benign"
    UNCERTAIN = "uncertain"
    MALICIOUS = "malicious"


class PolicyAction(str, Enum):
    RESERVE_BANDWIDTH = "reserve_bandwidth"
    RESHAPE = "reshape"
    RATE_LIMIT = "rate_limit"
    MARK_DROP_ELIGIBLE = "mark_drop_eligible"
    DROP = "drop"
    KILL_JOB = "kill_job"


# Graded legitimacy ladder; 100 is 'H', everything below is an uncertain tier.
LEGITIMACY_LADDER = (100, 95, 85, 75)


@dataclass(frozen=True)
class FlowRecord:
    source: str
    destination: str
    traffic_class: TrafficClass
    legitimacy: int
    offered_rate: float  # packets per second
    size_bits: float

    def __post_init__(self):
        if self.legitimacy not in LEGITIMACY_LADDER and self.legitimacy != 0:
            raise PipelineError(
                f"legitimacy {self.legitimacy} not on ladder {LEGITIMACY_LADDER}"
            )
        if self.traffic_class is TrafficClass.MALICIOUS and self.legitimacy == 100:
            raise PipelineError("malicious flow must never be marked H")
        if self.offered_rate < 0 or self.size_bits <= 0:
            raise PipelineError("offered_rate must be >= 0 and size_bits > 0")

    @property
    def offered_bits(self) -> float:
        return self.offered_rate * self.size_bits


def classify(
    source: str,
    destination: str,
    offered_rate: float,
    size_bits: float,
    bot_knowledge: frozenset | set = frozenset(),
    benign_profiles: frozenset | set = frozenset(),
    legitimacy_hint: int | None = None,
) -> FlowRecord:
    """Mark a flow from its metadata and the shared bot knowledge.

    Known-bad sources are malicious, statistically known-benign profiles go
    H, everything else is uncertain at the hinted graded tier (default the
    lowest, 'L'). Deterministic: identical metadata and knowledge always
    produce identical marking.
    """
    if source in bot_knowledge:
        return FlowRecord(source, destination, TrafficClass.MALICIOUS, 0,
                          offered_rate, size_bits)
    if source in benign_profiles:
        return FlowRecord(source, destination, TrafficClass.BENIGN, 100,
                          offered_rate, size_bits)
    legitimacy = legitimacy_hint if legitimacy_hint is not None else 75
    if legitimacy not in LEGITIMACY_LADDER or legitimacy == 100:
        raise PipelineError(f"uncertain flow cannot take legitimacy {legitimacy}")
    return FlowRecord(source, destination, TrafficClass.UNCERTAIN, legitimacy,
                      offered_rate, size_bits)


class TokenBucket:
    """Per-tick rate accounting for one traffic class."""

    def __init__(self, capacity_bits: float):
        if capacity_bits < 0:
            raise PipelineError("bucket capacity must be >= 0")
        self.capacity = capacity_bits
        self.tokens = capacity_bits

    def consume(self, bits: float) -> float:
        """Take up to ``bits`` tokens; returns how many were granted."""
        granted = min(bits, self.tokens)
        self.tokens -= granted
        return granted


@dataclass(frozen=True)
class FlowAdmission:
    flow: FlowRecord
    admitted_bits: float
    dropped_bits: float
    action: PolicyAction


@dataclass
class PolicingResult:
    admissions: list[FlowAdmission]
    offered_by_class: dict
    admitted_by_class: dict
    dropped_by_class: dict

    @property
    def admitted_total(self) -> float:
        return sum(self.admitted_by_class.values())


def police(
    flows,
    link_capacity: float,
    alarm: AlarmLevel = AlarmLevel.NONE,
    low_floor_share: float = 0.3,
) -> PolicingResult:
    """Admit one tick of marked flows through the bottleneck link.

    Malicious flows are dropped outright. Remaining classes are served in
    strictly descending legitimacy; within a tier over-offer is rationed
    proportionally. Under a regional alarm the uncertain tiers together are
    rate-limited to the low-priority floor share of capacity; under a grid
    alarm their jobs are killed and nothing below H is admitted.
    """
    if link_capacity <= 0:
        raise PipelineError(f"link capacity must be positive, got {link_capacity}")

    offered = {c: 0.0 for c in TrafficClass}
    admitted = {c: 0.0 for c in TrafficClass}
    dropped = {c: 0.0 for c in TrafficClass}
    admissions: list[FlowAdmission] = []

    link = TokenBucket(link_capacity)
    if alarm >= AlarmLevel.GRID:
        low_bucket = TokenBucket(0.0)
    elif alarm >= AlarmLevel.REGIONAL:
        low_bucket = TokenBucket(low_floor_share * link_capacity)
    else:
        low_bucket = TokenBucket(link_capacity)

    for tier in LEGITIMACY_LADDER:
        tier_flows = [
            f for f in flows
            if f.traffic_class is not TrafficClass.MALICIOUS and f.legitimacy == tier
        ]
        if not tier_flows:
            continue
        demand = sum(f.offered_bits for f in tier_flows)
        budget = link.tokens
        if tier < 100:
            budget = min(budget, low_bucket.tokens)
        grant_total = min(demand, budget)
        share = grant_total / demand if demand > 0 else 0.0
        for f in tier_flows:
            grant = f.offered_bits * share
            link.consume(grant)
            if tier < 100:
                low_bucket.consume(grant)
            drop = f.offered_bits - grant
            if tier < 100 and alarm >= AlarmLevel.GRID:
                action = PolicyAction.KILL_JOB
            elif drop > 0:
                action = PolicyAction.RATE_LIMIT
            elif tier == 100:
                action = PolicyAction.RESERVE_BANDWIDTH
            else:
                action = PolicyAction.MARK_DROP_ELIGIBLE
            admissions.append(FlowAdmission(f, grant, drop, action))
            offered[f.traffic_class] += f.offered_bits
            admitted[f.traffic_class] += grant
            dropped[f.traffic_class] += drop

    for f in flows:
        if f.traffic_class is TrafficClass.MALICIOUS:
            admissions.append(
                FlowAdmission(f, 0.0, f.offered_bits, PolicyAction.DROP)
            )
            offered[TrafficClass.MALICIOUS] += f.offered_bits
            dropped[TrafficClass.MALICIOUS] += f.offered_bits

    return PolicingResult(admissions, offered, admitted, dropped)
