"""Attacker economics: what a sustained campaign actually costs.

Money amounts are carried as ``Decimal`` so the published rental figures
and the joint-defense expense table come out exact, without float fuzz.
"""
from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal


class CostError(ValueError):
    """Invalid input to a cost-model operation."""


def _dec(value) -> Decimal:
    if isinstance(value, Decimal):
        return value
    return Decimal(str(value))


@dataclass(frozen=True)
class ResourceBreakdown:
    """Resource consumption split by traffic origin."""

    benign: float
    bot: float
    direct: float

    def __post_init__(self):
        if self.benign < 0 or self.bot < 0 or self.direct < 0:
            raise CostError("resource components must be non-negative")

    @property
    def total(self) -> float:
        return self.benign + self.bot + self.direct


@dataclass(frozen=True)
class BotnetQuote:
    """Market terms for a rented botnet.

    rental_price is per rental_period; durations are in seconds.
    """

    population: int
    rental_price: float
    rental_period: float
    setup_per_bot: float = 1.0

    def __post_init__(self):
        if self.population <= 0:
            raise CostError(f"population must be positive, got {self.population}")
        if self.rental_price <= 0:
            raise CostError(f"rental_price must be positive, got {self.rental_price}")
        if self.rental_period <= 0:
            raise CostError(f"rental_period must be positive, got {self.rental_period}")
        if self.setup_per_bot < 0:
            raise CostError(f"setup_per_bot must be >= 0, got {self.setup_per_bot}")


@dataclass(frozen=True)
class CostParams:
    """Knobs of the expense accounting.

    theta is the joint-defense expense multiplier; defaults to 3.5, the
    value that reproduces the published expense table. direct_unit_cost
    prices one direct attacking point (stand-in: the $40 remote-controller
    market entry).
    """

    mrt: float
    theta: float = 3.5
    direct_unit_cost: float = 40.0

    def __post_init__(self):
        if self.mrt <= 0:
            raise CostError(f"mrt must be positive, got {self.mrt}")
        if self.theta < 1:
            raise CostError(f"theta must be >= 1, got {self.theta}")
        if self.direct_unit_cost < 0:
            raise CostError("direct_unit_cost must be >= 0")


def attack_outcome(consumed: float, supplied: float) -> bool:
    """True iff the attacker wins: consumption strictly exceeds supply.

    Ties go to the defender.
    """
    if consumed < 0 or supplied < 0:
        raise CostError("resources must be non-negative")
    return consumed > supplied


def per_active_bot_expense(quote: BotnetQuote, mrt: float) -> Decimal:
    """Effective cost of one bot per rental period given its survival time.

    A bot neutralized after ``mrt`` seconds has to be re-rented
    rental_period/mrt times to stay on the field; the factor floors at 1
    because a bot surviving the whole period cannot cost less than its
    rental.
    """
    if mrt <= 0:
        raise CostError(f"mrt must be positive, got {mrt}")
    base = _dec(quote.rental_price) / _dec(quote.population)
    factor = _dec(quote.rental_period) / _dec(mrt)
    if factor < 1:
        factor = Decimal(1)
    return base * factor


def bot_cost(quote: BotnetQuote, mrt: float) -> Decimal:
    """Setup plus the survival-adjusted rental expense, per bot."""
    return _dec(quote.setup_per_bot) + per_active_bot_expense(quote, mrt)


def botnet_expense(num_actv: float, pabe) -> Decimal:
    """Expense of keeping ``num_actv`` bots active at the given per-bot rate."""
    if num_actv < 0:
        raise CostError(f"num_actv must be non-negative, got {num_actv}")
    return _dec(num_actv) * _dec(pabe)


def total_attack_cost(bot: float, direct: float) -> Decimal:
    """Total campaign cost; benign traffic contributes nothing."""
    if bot < 0 or direct < 0:
        raise CostError("costs must be non-negative")
    return _dec(bot) + _dec(direct)


def joint_expense(base_expense, defender_count: int, theta=3.5) -> Decimal:
    """Expense to compromise one object behind ``defender_count`` defenders.

    defender_count counts every cooperating defender including the victim;
    1 is the individual-defense case.
    """
    if defender_count < 1:
        raise CostError(
            f"defender_count must be >= 1, got {defender_count}"
        )
    return _dec(theta) * defender_count * _dec(base_expense)


def expense_table(bases, max_peers: int, theta=3.5) -> list[list[Decimal]]:
    """Joint expense matrix over base expenses x peer counts 1..max_peers.

    Each row is [base, cell(1 peer), ..., cell(max_peers peers)]; a victim
    with p peers faces the attacker with p+1 defenders.
    """
    if max_peers < 1:
        raise CostError(f"max_peers must be >= 1, got {max_peers}")
    rows = []
    for base in bases:
        row = [_dec(base)]
        for peers in range(1, max_peers + 1):
            row.append(joint_expense(base, peers + 1, theta))
        rows.append(row)
    return rows
