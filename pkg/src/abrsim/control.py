"""Pure control math shared by the PID-family schemes: control law, analytics, ramps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

DEFAULT_KP = 8.8e-3
DEFAULT_KI = 3.6e-5
DEFAULT_TARGET_BUFFER_S = 60.0
DEFAULT_EPSILON = 1e-10
VALID_ZETA_LOW = 0.6
VALID_ZETA_HIGH = 0.8


class ControlError(ValueError):
    """Invalid controller parameters or arguments."""


@dataclass(frozen=True)
class PidParams:
    """PI controller gains plus setpoint weighting and anti-windup threshold."""

    kp: float = DEFAULT_KP
    ki: float = DEFAULT_KI
    kd: float = 0.0
    beta: float = 1.0
    epsilon: float = DEFAULT_EPSILON
    target_buffer: float = DEFAULT_TARGET_BUFFER_S

    def __post_init__(self) -> None:
        if self.kp <= 0 or self.ki <= 0:
            raise ControlError("kp and ki must be positive")
        if self.kd != 0.0:
            raise ControlError("kd is fixed at 0 (PI controller)")
        if not 0.0 < self.beta <= 1.0:
            raise ControlError("beta must lie in (0, 1]")
        if not 0.0 < self.epsilon < 1.0:
            raise ControlError("epsilon must lie in (0, 1)")
        if self.target_buffer <= 0:
            raise ControlError("target buffer must be positive")


@dataclass
class PidState:
    """Caller-owned integral of (target - buffer); freeze suspends accumulation."""

    integral: float = 0.0
    freeze: bool = False

    def accumulate(self, target: float, x: float, dt: float) -> None:
        """Left-endpoint rule: integral += (target - x) * dt unless frozen."""
        if not self.freeze:
            self.integral += (target - x) * dt


def pid_output(
    params: PidParams,
    x: float,
    integral: float,
    target: float,
    playing_indicator: int,
) -> float:
    """u = kp*(beta*target - x) + ki*integral + playing_indicator."""
    if x < 0:
        raise ControlError("buffer must be >= 0")
    return params.kp * (params.beta * target - x) + params.ki * integral + playing_indicator


def bitrate_from_u(
    u: float,
    est_bandwidth_kbps: float,
    levels: tuple[tuple[int, float], ...],
) -> int:
    """Highest available bitrate <= est/u; lowest if none. levels: (level, kbps) pairs."""
    if u <= 0:
        raise ControlError("u must be positive (apply anti_windup first)")
    if not levels:
        raise ControlError("no levels to choose from")
    threshold = est_bandwidth_kbps / u
    eligible = [(rate, -lvl) for lvl, rate in levels if rate <= threshold]
    if eligible:
        return -max(eligible)[1]
    return min((rate, lvl) for lvl, rate in levels)[1]


def anti_windup(u: float, params: PidParams) -> tuple[float, bool, bool]:
    """Saturation guard: u <= epsilon -> (epsilon, freeze integral, force max bitrate)."""
    if u <= params.epsilon:
        return params.epsilon, True, True
    return u, False, False


def damping_ratio(kp: float, ki: float) -> float:
    """zeta = kp / (2*sqrt(ki))."""
    if ki <= 0:
        raise ControlError("ki must be positive")
    return kp / (2.0 * math.sqrt(ki))


def natural_frequency(ki: float) -> float:
    """omega_n = sqrt(ki)."""
    if ki <= 0:
        raise ControlError("ki must be positive")
    return math.sqrt(ki)


def is_valid_gain_pair(kp: float, ki: float) -> bool:
    """True iff the damping ratio falls in the closed band [0.6, 0.8]."""
    return VALID_ZETA_LOW <= damping_ratio(kp, ki) <= VALID_ZETA_HIGH


@dataclass(frozen=True)
class RampSchedule:
    """Startup ramp for kp and the buffer target over the first tau seconds."""

    alpha: float = 4.0
    tau: float = 300.0
    base_kp: float = DEFAULT_KP
    base_xr: float = DEFAULT_TARGET_BUFFER_S
    delta: float = 2.0

    def __post_init__(self) -> None:
        if self.alpha <= 1:
            raise ControlError("alpha must exceed 1")
        if self.tau <= 0:
            raise ControlError("tau must be positive")
        if self.base_kp <= 0 or self.base_xr <= 0 or self.delta <= 0:
            raise ControlError("base_kp, base_xr, delta must be positive")


def ramp_kp(schedule: RampSchedule, t: float) -> float:
    """Gain decaying linearly from alpha*base_kp at t=0 to base_kp at t=tau."""
    if t < 0:
        raise ControlError("t must be >= 0")
    if t > schedule.tau:
        return schedule.base_kp
    top = schedule.alpha * schedule.base_kp
    # Anchored at base_kp so the t=tau endpoint equals the base gain exactly.
    return schedule.base_kp + (top - schedule.base_kp) * (1.0 - t / schedule.tau)


def ramp_xr(schedule: RampSchedule, t: float) -> float:
    """Buffer target rising linearly to base_xr at t=tau, floored at two chunks."""
    if t < 0:
        raise ControlError("t must be >= 0")
    if t > schedule.tau:
        return schedule.base_xr
    return max(2.0 * schedule.delta, schedule.base_xr * t / schedule.tau)


def velocity_constant(params: PidParams) -> float:
    """Inverse velocity constant 1/Kv = kp*(1 - beta)/ki; zero ramp error iff beta=1."""
    return params.kp * (1.0 - params.beta) / params.ki
