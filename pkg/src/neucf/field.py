"""Reach planning field over movement directions.

181 neurons prefer directions 0..180 degrees in the egocentric half-plane.
Four input channels drive the field: excitatory target bumps from the spatial
sensory channel, expected-outcome bumps, inhibitory reach-cost bumps scaled by
target distance, and a spatially uniform pause channel that ramps up while a
stop cue is visible. The field runs leaky-integrator lattice dynamics with a
difference-of-Gaussians lateral kernel plus global inhibition; suprathreshold
activity is normalized into desirability weights and read out winner-take-all.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalBlowup, TargetBehindField

N_NEURONS = 181
DIRECTIONS = np.arange(N_NEURONS, dtype=float)  # preferred direction of neuron j, degrees

_BLOWUP = 1e6
_BEHIND_SLACK = 5.0  # degrees beyond the lattice ends tolerated before erroring


@dataclass(frozen=True)
class FieldParams:
    """Dynamics and input-channel constants.

    The lattice form and every value here are modeling choices, not published
    constants; they are tuned so a single target decides within a few tenths
    of a second, competing bumps resolve winner-take-all, and activity decays
    once its driving input is gone.
    """

    tau: float = 0.1                 # field time constant, s
    h: float = -1.0                  # resting level
    theta_init: float = 0.5          # action initiation threshold
    dt: float = 0.01                 # integration step, s
    noise_sigma: float = 0.05        # per-sqrt(s) Gaussian noise scale
    beta: float = 4.0                # output sigmoid steepness
    u_f: float = 0.0                 # output sigmoid center
    exc_amp: float = 0.45
    exc_sigma: float = 5.0           # degrees
    inh_amp: float = 0.225
    inh_sigma: float = 12.5          # degrees
    global_inh: float = 0.16
    sensory_amp: float = 2.0
    outcome_amp: float = 0.5
    cost_amp: float = 1.2
    input_sigma: float = 8.0         # degrees, width of all beacon-driven bumps
    pause_amp: float = 4.0
    pause_tau: float = 0.15          # s, ramp time constant of the pause channel

    def __post_init__(self):
        if self.tau <= 0 or self.dt <= 0 or self.dt > self.tau / 5.0:
            raise ValueError("require tau > 0, dt > 0 and dt <= tau/5 for stability")
        if self.theta_init <= self.h:
            raise ValueError("initiation threshold must sit above the resting level")


@dataclass
class FieldState:
    u: np.ndarray                    # (181,) activities
    inputs: "FieldInputs"
    t: float = 0.0


@dataclass
class FieldInputs:
    sensory: np.ndarray
    outcome: np.ndarray
    cost: np.ndarray
    pause: np.ndarray

    @classmethod
    def zero(cls) -> "FieldInputs":
        z = np.zeros(N_NEURONS)
        return cls(z.copy(), z.copy(), z.copy(), z.copy())

    def total(self) -> np.ndarray:
        return self.sensory + self.outcome + self.cost + self.pause


@dataclass(frozen=True)
class Desirability:
    d: np.ndarray                    # (181,) weights, zero off the active set
    active_set: tuple[int, ...]


def initial_state(params: FieldParams) -> FieldState:
    return FieldState(u=np.full(N_NEURONS, params.h), inputs=FieldInputs.zero(), t=0.0)


def target_direction(ee_pos, target_pos, strict: bool = True) -> float | None:
    """Egocentric direction from the end effector to a target, degrees in [0, 180].

    Directions up to 5 degrees outside the lattice clamp onto its ends. Beyond
    that the target is not representable: raise when strict, otherwise None.
    """
    theta = float(np.degrees(np.arctan2(target_pos[1] - ee_pos[1], target_pos[0] - ee_pos[0])))
    if theta < 0.0:
        if theta >= -_BEHIND_SLACK:
            return 0.0
        if theta <= -180.0 + _BEHIND_SLACK:
            return 180.0
        if strict:
            raise TargetBehindField(f"direction {theta:.1f} deg not representable")
        return None
    return theta


def _bump(center_deg: float, amp: float, sigma: float) -> np.ndarray:
    return amp * np.exp(-((DIRECTIONS - center_deg) ** 2) / (2.0 * sigma**2))


def compose_inputs(
    targets: list[tuple[tuple[float, float], float]],
    stop_level: float,
    ee_pos: tuple[float, float],
    params: FieldParams,
    workspace_diag: float,
    strict: bool = True,
) -> FieldInputs:
    """Build the four input channels from visible beacons.

    targets: (world position, reward weight) per visible reach beacon;
    disappeared beacons must already be excluded. stop_level is the pause
    ramp in [0, 1] maintained by the caller via step_pause.
    """
    inputs = FieldInputs.zero()
    for pos, reward in targets:
        r = float(np.hypot(pos[0] - ee_pos[0], pos[1] - ee_pos[1]))
        theta = target_direction(ee_pos, pos, strict=strict)
        if theta is None:
            continue
        inputs.sensory += _bump(theta, params.sensory_amp, params.input_sigma)
        inputs.outcome += _bump(theta, params.outcome_amp * reward, params.input_sigma)
        inputs.cost -= _bump(theta, params.cost_amp * r / workspace_diag, params.input_sigma)
    inputs.pause -= params.pause_amp * stop_level * np.ones(N_NEURONS)
    return inputs


def step_pause(level: float, stop_visible: bool, params: FieldParams) -> float:
    """First-order ramp of the pause channel toward 1 while a stop cue is visible."""
    target = 1.0 if stop_visible else 0.0
    return level + (params.dt / params.pause_tau) * (target - level)


def lateral_kernel(params: FieldParams) -> np.ndarray:
    d = DIRECTIONS[:, None] - DIRECTIONS[None, :]
    exc = params.exc_amp * np.exp(-(d**2) / (2.0 * params.exc_sigma**2))
    inh = params.inh_amp * np.exp(-(d**2) / (2.0 * params.inh_sigma**2))
    return exc - inh - params.global_inh


def output_rate(u: np.ndarray, params: FieldParams) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-params.beta * (u - params.u_f)))


def step_field(
    state: FieldState,
    inputs: FieldInputs,
    params: FieldParams,
    rng: np.random.Generator,
    kernel: np.ndarray | None = None,
) -> FieldState:
    """One Euler step of the lattice dynamics.

    Lateral interaction acts on the output excess over the resting rate, so
    the uniform resting level is an exact fixed point of the noiseless field.
    Noise is scaled by sqrt(dt) to keep behavior step-size robust.
    """
    if kernel is None:
        kernel = lateral_kernel(params)
    rest_rate = output_rate(np.array([params.h]), params)[0]
    lateral = kernel @ (output_rate(state.u, params) - rest_rate)
    drift = -state.u + params.h + inputs.total() + lateral
    u = state.u + (params.dt / params.tau) * drift
    if params.noise_sigma > 0.0:
        u = u + params.noise_sigma * np.sqrt(params.dt) * rng.standard_normal(N_NEURONS)
    if np.any(np.abs(u) > _BLOWUP) or not np.all(np.isfinite(u)):
        raise NumericalBlowup("field activity exceeded sane bounds")
    return FieldState(u=u, inputs=inputs, t=state.t + params.dt)


def desirability(state: FieldState, theta_init: float) -> Desirability:
    """Normalize suprathreshold excess into mixing weights that sum to one."""
    u = state.u
    active = np.nonzero(u > theta_init)[0]
    d = np.zeros(N_NEURONS)
    if len(active):
        excess = u[active] - theta_init
        d[active] = excess / excess.sum()
    return Desirability(d=d, active_set=tuple(int(j) for j in active))


def winner(state: FieldState, theta_init: float) -> int | None:
    """Most active suprathreshold neuron; ties break toward the lower index."""
    des = desirability(state, theta_init)
    if not des.active_set:
        return None
    act = np.array(des.active_set)
    vals = state.u[act]
    return int(act[np.argmax(vals)])  # argmax returns the first (lowest) index on ties
