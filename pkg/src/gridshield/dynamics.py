"""Attacker/defender population dynamics.

Two coupled populations: defending units, which multiply through
collaboration but are worn down by contact with active bots, and active
attacking units (bots plus direct attacking points), which recruit off
defender contact and decay otherwise. Closed orbits of the system conserve
a scalar quantity, which doubles as a built-in accuracy oracle for the
fixed-step integrator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field


class DynamicsError(ValueError):
    """Invalid input to a population-dynamics operation."""


class NullclineSingularity(DynamicsError):
    """Phase slope requested on a nullcline where it is undefined."""


def _require_finite(name, value):
    if not math.isfinite(value):
        raise DynamicsError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class ModelParams:
    """Interaction constants of the two-population system.

    alpha: defender growth rate (1/time)
    beta:  defender attrition per active attacker (1/(time*population))
    gamma: bot attrition rate (1/time)
    delta: bot recruitment per defender contact (1/(time*population))
    """

    alpha: float
    beta: float
    gamma: float
    delta: float

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "delta"):
            value = getattr(self, name)
            _require_finite(name, value)
            if value <= 0:
                raise DynamicsError(f"{name} must be strictly positive, got {value}")


@dataclass(frozen=True)
class PopulationState:
    """Population pair at a point in time."""

    num_unit: float
    num_actv: float
    t: float = 0.0

    def __post_init__(self):
        for name in ("num_unit", "num_actv", "t"):
            _require_finite(name, getattr(self, name))
        if self.num_unit < 0 or self.num_actv < 0:
            raise DynamicsError(
                f"populations must be non-negative, got "
                f"({self.num_unit}, {self.num_actv})"
            )


@dataclass(frozen=True)
class Equilibrium:
    """The two fixed points of the system."""

    trivial: tuple[float, float]
    coexistence: tuple[float, float]


def derivatives(params: ModelParams, state: PopulationState) -> tuple[float, float]:
    """Instantaneous growth rates (d num_unit/dt, d num_actv/dt)."""
    u, a = state.num_unit, state.num_actv
    return (
        params.alpha * u - params.beta * u * a,
        params.delta * u * a - params.gamma * a,
    )


def phase_slope(params: ModelParams, state: PopulationState) -> float:
    """Slope d num_actv / d num_unit of the orbit through ``state``.

    Undefined on the num_unit nullcline (num_unit = 0 or
    num_actv = alpha/beta), where the denominator vanishes.
    """
    u, a = state.num_unit, state.num_actv
    denominator = params.alpha * u - params.beta * u * a
    if denominator == 0:
        raise NullclineSingularity(
            f"state ({u}, {a}) lies on the num_unit nullcline "
            f"(num_unit = 0 or num_actv = alpha/beta = "
            f"{params.alpha / params.beta})"
        )
    return (a / u) * (params.delta * u - params.gamma) / (params.alpha - params.beta * a)


def equilibria(params: ModelParams) -> Equilibrium:
    """Both fixed points: extinction and coexistence."""
    return Equilibrium(
        trivial=(0.0, 0.0),
        coexistence=(params.gamma / params.delta, params.alpha / params.beta),
    )


def constant_of_motion(params: ModelParams, state: PopulationState) -> float:
    """Conserved quantity along orbits, defined on the open positive quadrant."""
    u, a = state.num_unit, state.num_actv
    if u <= 0 or a <= 0:
        raise DynamicsError(
            f"constant of motion requires strictly positive populations, "
            f"got ({u}, {a})"
        )
    # Evaluate in log space; the direct product under/overflows for large
    # exponents.
    log_k = (
        params.alpha * math.log(a)
        - params.beta * a
        + params.gamma * math.log(u)
        - params.delta * u
    )
    return math.exp(log_k)


def k_star(params: ModelParams) -> float:
    """Maximum of the conserved quantity, attained at the coexistence point."""
    log_k = params.alpha * (
        math.log(params.alpha) - math.log(params.beta) - 1.0
    ) + params.gamma * (math.log(params.gamma) - math.log(params.delta) - 1.0)
    return math.exp(log_k)


def linearized_period(params: ModelParams) -> float:
    """Oscillation period of small orbits around the coexistence point."""
    return 2.0 * math.pi / math.sqrt(params.alpha * params.gamma)


def default_step(params: ModelParams) -> float:
    """Default integration step: 1/10000 of the linearized period."""
    return linearized_period(params) / 10000.0


@dataclass
class Trajectory:
    """Integrated orbit sampled at fixed time steps."""

    states: list[PopulationState] = field(default_factory=list)
    clamped: bool = False

    def __iter__(self):
        return iter(self.states)

    def __len__(self):
        return len(self.states)

    def __getitem__(self, idx):
        return self.states[idx]


def _rk4_step(params, u, a, h):
    def f(u_, a_):
        return (
            params.alpha * u_ - params.beta * u_ * a_,
            params.delta * u_ * a_ - params.gamma * a_,
        )

    k1u, k1a = f(u, a)
    k2u, k2a = f(u + 0.5 * h * k1u, a + 0.5 * h * k1a)
    k3u, k3a = f(u + 0.5 * h * k2u, a + 0.5 * h * k2a)
    k4u, k4a = f(u + h * k3u, a + h * k3a)
    return (
        u + h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u),
        a + h / 6.0 * (k1a + 2 * k2a + 2 * k3a + k4a),
    )


def integrate(
    params: ModelParams,
    initial: PopulationState,
    horizon: float,
    step: float | None = None,
) -> Trajectory:
    """Fixed-step classical 4th-order Runge-Kutta integration.

    Returns states at t0, t0+step, ... up to t0+horizon (the final step is
    shortened to land exactly on the horizon). A step that undershoots zero
    is clamped to zero and the trajectory is flagged; the model is only
    meaningful on the non-negative quadrant.
    """
    if step is None:
        step = default_step(params)
    if horizon <= 0:
        raise DynamicsError(f"horizon must be positive, got {horizon}")
    if step <= 0:
        raise DynamicsError(f"step must be positive, got {step}")
    if step > horizon:
        raise DynamicsError(f"step {step} exceeds horizon {horizon}")

    trajectory = Trajectory(states=[initial])
    u, a = initial.num_unit, initial.num_actv
    t0 = initial.t
    elapsed = 0.0
    while elapsed < horizon - 1e-12 * horizon:
        h = min(step, horizon - elapsed)
        u, a = _rk4_step(params, u, a, h)
        if u < 0 or a < 0:
            u = max(u, 0.0)
            a = max(a, 0.0)
            trajectory.clamped = True
        elapsed += h
        trajectory.states.append(PopulationState(u, a, t0 + elapsed))
    return trajectory


def orbit_period(
    params: ModelParams,
    initial: PopulationState,
    step: float | None = None,
    max_periods: float = 5.0,
) -> float:
    """Orbit period located by successive upward crossings of num_unit = gamma/delta.

    Integrates up to ``max_periods`` linearized periods and interpolates the
    crossing times linearly.
    """
    if initial.num_unit <= 0 or initial.num_actv <= 0:
        raise DynamicsError("period detection requires a strictly positive start")
    if step is None:
        step = default_step(params)
    u_star = params.gamma / params.delta
    horizon = max_periods * linearized_period(params)
    trajectory = integrate(params, initial, horizon, step)

    crossings = []
    for prev, cur in zip(trajectory.states, trajectory.states[1:]):
        if prev.num_unit < u_star <= cur.num_unit:
            frac = (u_star - prev.num_unit) / (cur.num_unit - prev.num_unit)
            crossings.append(prev.t + frac * (cur.t - prev.t))
            if len(crossings) == 2:
                return crossings[1] - crossings[0]
    raise DynamicsError(
        "could not locate two upward crossings of the coexistence line; "
        "increase max_periods or refine the step"
    )
