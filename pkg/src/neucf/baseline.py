"""Cubic time-scaled straight-line trajectories, the comparison baseline.

The scalar progress profile s(t) = a2 t^2 + a3 t^3 runs from 0 to 1 with zero
boundary velocity, and each workspace axis is scaled independently along the
straight segment from start to goal.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonpositiveHorizon, OutOfHorizon


@dataclass(frozen=True)
class CubicProfile:
    a0: float
    a1: float
    a2: float
    a3: float
    T: float
    start: tuple[float, float]
    goal: tuple[float, float]


def cubic_coeffs(T: float) -> tuple[float, float, float, float]:
    """Closed-form coefficients for the rest-to-rest unit profile on [0, T]."""
    if T <= 0:
        raise NonpositiveHorizon(f"terminal time must be positive, got {T}")
    return (0.0, 0.0, 3.0 / T**2, -2.0 / T**3)


def make_profile(start, goal, T: float) -> CubicProfile:
    a0, a1, a2, a3 = cubic_coeffs(T)
    return CubicProfile(a0, a1, a2, a3, T, (float(start[0]), float(start[1])), (float(goal[0]), float(goal[1])))


def sample_trajectory(profile: CubicProfile, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Position (cm) and velocity (cm/s) of the profile at time t in [0, T]."""
    if t < 0.0 or t > profile.T:
        raise OutOfHorizon(f"t={t} outside [0, {profile.T}]")
    s = profile.a0 + profile.a1 * t + profile.a2 * t**2 + profile.a3 * t**3
    sdot = profile.a1 + 2.0 * profile.a2 * t + 3.0 * profile.a3 * t**2
    start = np.array(profile.start)
    span = np.array(profile.goal) - start
    return start + s * span, sdot * span


def accel_at(profile: CubicProfile, t: float) -> np.ndarray:
    """Analytic acceleration of the profile, for logging and derivative checks."""
    if t < 0.0 or t > profile.T:
        raise OutOfHorizon(f"t={t} outside [0, {profile.T}]")
    sdd = 2.0 * profile.a2 + 6.0 * profile.a3 * t
    return sdd * (np.array(profile.goal) - np.array(profile.start))


def peak_speed(profile: CubicProfile) -> float:
    """Analytic maximum of the speed, attained at T/2."""
    dist = float(np.hypot(profile.goal[0] - profile.start[0], profile.goal[1] - profile.start[1]))
    return 1.5 * dist / profile.T
