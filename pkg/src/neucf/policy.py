"""Per-neuron finite-horizon optimal reach controllers.

Each suprathreshold neuron gets a quadratic-cost tracking controller toward a
point at the associated beacon distance along the neuron's preferred
direction. The plant model is a discrete double integrator; minimizing a
terminal position/velocity error plus control energy gives time-indexed
linear feedback gains via the backward Riccati recursion. Additive Gaussian
state noise leaves the minimizer unchanged (certainty equivalence), so the
same gains serve the noisy closed loop. Desirability weights blend the active
controllers into one motor command.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateReach, HorizonExceeded, IllConditioned

POSITION_SELECTOR = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]])

_MIN_REACH_CM = 0.1
_COND_LIMIT = 1e12


@dataclass(frozen=True)
class ControlConfig:
    terminal_pos_weight: float = 1e4   # q_p, on terminal position error
    terminal_vel_weight: float = 1e3   # q_v, so reaches end at rest
    control_weight: float = 1e-2       # R scale, on control energy
    v_nominal: float = 12.5            # cm/s used to size horizons; half the plant cap
    speed_limit: float = 25.0          # cm/s, enforced at the plant
    brake_gain: float = 5.0            # 1/s, command -k*v when nothing is active
    min_horizon_steps: int = 2
    max_horizon_steps: int = 3600
    wta_only: bool = False             # follow only the winner instead of blending


@dataclass(frozen=True)
class PolicyProblem:
    """Finite-horizon tracking problem for one neuron's reach."""

    A: np.ndarray            # 4x4 state transition, state [px, py, vx, vy]
    B: np.ndarray            # 4x2 control map, control in cm/s^2
    Q_T: np.ndarray          # 4x4 terminal cost (position error + terminal velocity)
    R: np.ndarray            # 2x2 control cost
    D: np.ndarray            # 2x4 position selector
    target: np.ndarray       # (2,) cm
    horizon: int             # steps
    dt: float

    def __post_init__(self):
        if self.horizon < 2:
            raise ValueError("horizon must be at least 2 steps")


@dataclass(frozen=True)
class ReachPolicy:
    """Time-indexed affine feedback u_t = -L_t x + l_t, t in [1, horizon-1]."""

    gains: np.ndarray        # (horizon-1, 2, 4)
    feedforward: np.ndarray  # (horizon-1, 2)
    target: np.ndarray
    horizon: int


def double_integrator(dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Exact zero-order-hold discretization of unit-mass planar dynamics."""
    A = np.array([
        [1.0, 0.0, dt, 0.0],
        [0.0, 1.0, 0.0, dt],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ])
    B = np.array([
        [0.5 * dt * dt, 0.0],
        [0.0, 0.5 * dt * dt],
        [dt, 0.0],
        [0.0, dt],
    ])
    return A, B


def make_problem(
    ee_state: np.ndarray,
    neuron_dir_deg: float,
    r: float,
    cfg: ControlConfig,
    dt: float,
) -> PolicyProblem:
    """Pose the reach problem for a neuron: target at distance r along its direction.

    The horizon is sized from the nominal speed so the closed-loop peak speed
    stays under the plant's cap. Raises DegenerateReach below 0.1 cm.
    """
    if r < _MIN_REACH_CM:
        raise DegenerateReach(f"reach distance {r:.3g} cm below minimum")
    phi = math.radians(neuron_dir_deg)
    target = np.array([ee_state[0] + r * math.cos(phi), ee_state[1] + r * math.sin(phi)])
    lo = max(2, cfg.min_horizon_steps)
    horizon = min(max(math.ceil((r / cfg.v_nominal) / dt), lo), cfg.max_horizon_steps)
    A, B = double_integrator(dt)
    q_term = (
        POSITION_SELECTOR.T @ (cfg.terminal_pos_weight * np.eye(2)) @ POSITION_SELECTOR
        + np.diag([0.0, 0.0, cfg.terminal_vel_weight, cfg.terminal_vel_weight])
    )
    return PolicyProblem(
        A=A,
        B=B,
        Q_T=q_term,
        R=cfg.control_weight * np.eye(2),
        D=POSITION_SELECTOR,
        target=target,
        horizon=int(horizon),
        dt=dt,
    )


def riccati_gains(A: np.ndarray, B: np.ndarray, R: np.ndarray, Q_T: np.ndarray, n_steps: int) -> np.ndarray:
    """Backward recursion for the finite-horizon regulator; gains oldest first."""
    P = Q_T.copy()
    nu, nx = B.shape[1], B.shape[0]
    gains = np.empty((n_steps, nu, nx))
    for k in range(n_steps - 1, -1, -1):
        BtP = B.T @ P
        G = R + BtP @ B
        if np.linalg.cond(G) > _COND_LIMIT:
            raise IllConditioned("Riccati iterate is numerically singular")
        L = np.linalg.solve(G, BtP @ A)
        P = A.T @ P @ (A - B @ L)
        P = 0.5 * (P + P.T)
        gains[k] = L
    return gains


def solve_policy(prob: PolicyProblem) -> ReachPolicy:
    """Unique cost minimizer as time-indexed affine feedback.

    The terminal cost is invariant to shifting the state by the rest goal
    [target, 0], so the tracking law is pure feedback on the shifted state:
    u = -L_t (x - x_goal), i.e. feedforward l_t = L_t @ x_goal.
    """
    gains = riccati_gains(prob.A, prob.B, prob.R, prob.Q_T, prob.horizon - 1)
    x_goal = np.array([prob.target[0], prob.target[1], 0.0, 0.0])
    feedforward = gains @ x_goal
    return ReachPolicy(gains=gains, feedforward=feedforward, target=prob.target.copy(), horizon=prob.horizon)


def eval_policy(policy: ReachPolicy, x: np.ndarray, t: int) -> np.ndarray:
    """Command at step t in [1, horizon-1]; the plant enforces the speed cap."""
    if t < 1 or t > policy.horizon - 1:
        raise HorizonExceeded(f"step {t} outside [1, {policy.horizon - 1}]")
    return -policy.gains[t - 1] @ np.asarray(x, dtype=float) + policy.feedforward[t - 1]


def gains_csv(policy: ReachPolicy, dt: float) -> str:
    """Debug dump of the time-indexed gains: t, the eight L entries, both l entries."""
    header = "t," + ",".join(f"L{r}{c}" for r in range(2) for c in range(4)) + ",l0,l1"
    lines = [header]
    for k in range(policy.horizon - 1):
        vals = [repr(float((k + 1) * dt))]
        vals += [repr(float(v)) for v in policy.gains[k].ravel()]
        vals += [repr(float(v)) for v in policy.feedforward[k]]
        lines.append(",".join(vals))
    return "\n".join(lines) + "\n"


def blend_commands(
    entries: list[tuple[ReachPolicy, int]],
    weights: list[float],
    x: np.ndarray,
    velocity: np.ndarray,
    cfg: ControlConfig,
) -> np.ndarray:
    """Desirability-weighted mix of active policies; braking when none are active.

    entries pairs each policy with its local step index. weights are the
    desirability values of the same neurons.
    """
    if not entries:
        return -cfg.brake_gain * np.asarray(velocity, dtype=float)
    u = np.zeros(2)
    for (policy, t), w in zip(entries, weights):
        u += w * eval_policy(policy, x, t)
    return u
