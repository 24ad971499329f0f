"""Control plane of the cooperating-defender grid.

Defenders register with a coordinator, form peer links along suspicious
traffic paths, and escalate alarms (none -> local -> regional -> grid) as
attacking power outgrows successive tiers of defensive capacity. The
coordinator accumulates bot knowledge from member reports and fans it back
out as guidelines and source-end block instructions.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum, IntEnum


class ProtocolError(ValueError):
    """Invalid control-plane operation."""


class RegistrationError(ProtocolError):
    """Membership registration rejected."""


class AlarmLevel(IntEnum):
    NONE = 0
    LOCAL = 1
    REGIONAL = 2
    GRID = 3


class MessageKind(str, Enum):
    QUERY = "query"
    ALARM = "alarm"
    UPDATE = "update"
    GUIDELINE = "guideline"
    OFFLOAD_REQUEST = "offload_request"
    OFFLOAD_GRANT = "offload_grant"
    ALLOCATION = "allocation"
    BLOCK = "block"
    INVESTIGATION = "investigation"


@dataclass(frozen=True)
class ControlMessage:
    kind: MessageKind
    source: str
    destination: str
    payload: dict
    time: float = 0.0

    def digest(self) -> str:
        blob = json.dumps(self.payload, sort_keys=True, default=str)
        return hashlib.sha1(blob.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class DefenderProfile:
    """One participating defender: identity plus filtering power.

    Capacities are in the same abstract resource units as attack power
    (offered malicious load vs filtering throughput).
    """

    id: str
    defense_capacity: float
    spare_capacity: float
    certificate: str = ""

    def __post_init__(self):
        if self.defense_capacity < 0 or self.spare_capacity < 0:
            raise ProtocolError("capacities must be non-negative")
        if self.spare_capacity > self.defense_capacity:
            raise ProtocolError(
                f"spare capacity {self.spare_capacity} exceeds defense "
                f"capacity {self.defense_capacity}"
            )


@dataclass
class PeerLink:
    upstream: str
    downstream: str
    last_uncertain_traffic: float
    stale_timeout: float


@dataclass
class CoordinatorState:
    """Global bookkeeping: membership, bot knowledge, allocatable units.

    bot_knowledge only grows within a scenario run; knowledge is never
    forgotten mid-run.
    """

    members: dict[str, DefenderProfile] = field(default_factory=dict)
    bot_knowledge: set[str] = field(default_factory=set)
    allocatable_units: float = 0.0
    outbox: list[ControlMessage] = field(default_factory=list)


def register(
    coordinator: CoordinatorState, profile: DefenderProfile, now: float = 0.0
) -> CoordinatorState:
    """Admit a defender and queue it a guideline with current bot knowledge."""
    if profile.id in coordinator.members:
        raise RegistrationError(f"duplicate member id {profile.id!r}")
    if not profile.certificate:
        raise RegistrationError(f"member {profile.id!r} carries no credential")
    coordinator.members[profile.id] = profile
    coordinator.outbox.append(
        ControlMessage(
            kind=MessageKind.GUIDELINE,
            source="coordinator",
            destination=profile.id,
            payload={"bot_knowledge": sorted(coordinator.bot_knowledge)},
            time=now,
        )
    )
    return coordinator


def touch_peer(
    peers: dict[str, PeerLink],
    upstream: str,
    downstream: str,
    now: float,
    stale_timeout: float,
) -> PeerLink:
    """Record uncertain traffic on a path, (re)creating the link if absent."""
    key = f"{upstream}->{downstream}"
    link = peers.get(key)
    if link is None:
        link = PeerLink(upstream, downstream, now, stale_timeout)
        peers[key] = link
    else:
        link.last_uncertain_traffic = now
    return link


def prune_peers(peers: dict[str, PeerLink], now: float) -> dict[str, PeerLink]:
    """Drop links with no uncertain traffic for longer than their timeout.

    The boundary is inclusive: a link last touched exactly stale_timeout ago
    is retained.
    """
    stale = [
        key
        for key, link in peers.items()
        if now - link.last_uncertain_traffic > link.stale_timeout
    ]
    for key in stale:
        del peers[key]
    return peers


@dataclass(frozen=True)
class AlarmAction:
    kind: str
    amount: float | None = None


def evaluate_alarm(
    attack_power: float,
    local_capacity: float,
    peer_spare: float,
    coordinator_units: float,
    threshold_ratio: float = 1.0,
) -> tuple[AlarmLevel, list[AlarmAction]]:
    """Escalation decision for one evaluation of the defense posture.

    Within local capacity: no alarm. Beyond it: local alarm plus an offload
    request; the alarm holds local if peers' spare covers the excess.
    Beyond the peers: regional alarm, allocation request to the coordinator,
    and rate limiting of lower-priority traffic. When the coordinator has no
    units left to cover the rest: grid alarm, lower-priority jobs killed.
    """
    if min(attack_power, local_capacity, peer_spare, coordinator_units) < 0:
        raise ProtocolError("powers and capacities must be non-negative")
    if attack_power <= threshold_ratio * local_capacity:
        return AlarmLevel.NONE, []

    excess = attack_power - threshold_ratio * local_capacity
    actions = [AlarmAction("offload_request", excess)]
    granted = min(peer_spare, excess)
    actions.append(AlarmAction("offload_grant", granted))
    if peer_spare >= excess:
        return AlarmLevel.LOCAL, actions

    remainder = excess - peer_spare
    actions.append(AlarmAction("allocation_request", remainder))
    if coordinator_units >= remainder:
        actions.append(AlarmAction("allocate", remainder))
        actions.append(AlarmAction("rate_limit_low_priority"))
        return AlarmLevel.REGIONAL, actions

    actions.append(AlarmAction("allocate", coordinator_units))
    actions.append(AlarmAction("kill_low_priority_jobs"))
    return AlarmLevel.GRID, actions


class AlarmMonitor:
    """Level tracker moving at most one level per evaluation event.

    De-escalation lags one evaluation behind the target to avoid
    oscillating around a threshold.
    """

    def __init__(self, level: AlarmLevel = AlarmLevel.NONE):
        self.level = level
        self._deescalate_armed = False

    def step(self, target: AlarmLevel) -> AlarmLevel:
        if target > self.level:
            self.level = AlarmLevel(self.level + 1)
            self._deescalate_armed = False
        elif target < self.level:
            if self._deescalate_armed:
                self.level = AlarmLevel(self.level - 1)
            else:
                self._deescalate_armed = True
        else:
            self._deescalate_armed = False
        return self.level


def propagate_update(
    coordinator: CoordinatorState,
    source_address: str,
    victim_address: str,
    origin: str,
    path: tuple[str, ...] = (),
    now: float = 0.0,
) -> list[ControlMessage]:
    """Handle a member's (attack source, victim) report.

    A report from outside the membership queues an investigation event
    instead of a block. First reports of a source fan a guideline out to
    every member and instruct agents on the source->victim path to block at
    the source end; repeats are idempotent.
    """
    queued: list[ControlMessage] = []
    if origin not in coordinator.members:
        message = ControlMessage(
            kind=MessageKind.INVESTIGATION,
            source=origin,
            destination="coordinator",
            payload={"source": source_address, "victim": victim_address},
            time=now,
        )
        coordinator.outbox.append(message)
        return [message]

    if source_address in coordinator.bot_knowledge:
        return []

    coordinator.bot_knowledge.add(source_address)
    for member_id in coordinator.members:
        queued.append(
            ControlMessage(
                kind=MessageKind.GUIDELINE,
                source="coordinator",
                destination=member_id,
                payload={"bot_knowledge_add": source_address},
                time=now,
            )
        )
    for agent_id in path:
        queued.append(
            ControlMessage(
                kind=MessageKind.BLOCK,
                source="coordinator",
                destination=agent_id,
                payload={"source": source_address, "victim": victim_address},
                time=now,
            )
        )
    coordinator.outbox.extend(queued)
    return queued


def format_trace(messages) -> str:
    """Newline-delimited event log: time, sender, kind, payload digest."""
    lines = [
        f"{m.time:.6f}\t{m.source}\t{m.destination}\t{m.kind.value}\t{m.digest()}"
        for m in messages
    ]
    return "\n".join(lines)
