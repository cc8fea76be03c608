"""Deterministic closed-loop scenario runner.

One fixed-step loop drives scene events, the 30 fps sensing path, the
decision field, the controller bank (or the cubic baseline), and a planar
point plant with a hard speed cap. Identical (script, config, seed) inputs
produce bit-identical logs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field, replace

import numpy as np

from . import baseline, field as dnf, metrics, policy
from .errors import DegenerateReach, DegeneratePath, ScenarioInvalid, TooFewSamples, ValidationError
from .scenario import ADD, MOVE, REMOVE, ScenarioEvent, ScenarioScript, validate_script
from .tracking import BeaconTracker, TrackerConfig
from .vision import (
    Blob,
    RasterImage,
    SegmentationConfig,
    WorkspaceCalib,
    segment_beacons,
    world_to_pixel,
)

ORANGE_RGB = (255, 140, 0)
GREEN_RGB = (0, 200, 0)
BALL_RADIUS_CM = 3.75

STATUS_REACHED = "reached"
STATUS_STOPPED = "stopped"
STATUS_TIMEOUT = "timeout"


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.01
    sensor_fps: float = 30.0
    vision_mode: bool = False
    goal_pos_eps: float = 0.5        # cm, goal attainment
    goal_speed_eps: float = 0.5      # cm/s
    replan_drift: float = 0.5        # cm of target motion before a controller re-plans
    brake_ramp_s: float = 0.5        # baseline's smooth stop duration
    field: dnf.FieldParams = dc_field(default_factory=dnf.FieldParams)
    control: policy.ControlConfig = dc_field(default_factory=policy.ControlConfig)
    tracker: TrackerConfig = dc_field(default_factory=TrackerConfig)
    segmentation: SegmentationConfig = dc_field(default_factory=SegmentationConfig)
    calib: WorkspaceCalib = dc_field(default_factory=WorkspaceCalib)


@dataclass(frozen=True)
class PlantState:
    p: tuple[float, float]
    v: tuple[float, float]
    t: float

    @property
    def speed(self) -> float:
        return math.hypot(self.v[0], self.v[1])


def plant_step(
    s: PlantState,
    u: np.ndarray,
    dt: float,
    speed_limit: float = 25.0,
    bounds: tuple[float, float] | None = None,
) -> PlantState:
    """Semi-implicit Euler with a hard speed cap and a 1 cm workspace margin wall."""
    vx = s.v[0] + float(u[0]) * dt
    vy = s.v[1] + float(u[1]) * dt
    speed = math.hypot(vx, vy)
    if speed > speed_limit:
        vx *= speed_limit / speed
        vy *= speed_limit / speed
    px = s.p[0] + vx * dt
    py = s.p[1] + vy * dt
    if bounds is not None:
        w, h = bounds
        if px < -1.0 or px > w + 1.0:
            px = min(max(px, -1.0), w + 1.0)
            vx = 0.0
        if py < -1.0 or py > h + 1.0:
            py = min(max(py, -1.0), h + 1.0)
            vy = 0.0
    return PlantState(p=(px, py), v=(vx, vy), t=s.t + dt)


@dataclass
class SceneBeacon:
    id: int
    color: str
    pos: tuple[float, float]


@dataclass
class Sample:
    t: float
    p: tuple[float, float]
    v: tuple[float, float]
    u: tuple[float, float]
    winner: int | None
    active_count: int
    desirability: tuple[tuple[int, float], ...]
    beacons: tuple


@dataclass
class TrajectoryLog:
    samples: list[Sample]
    field_history: np.ndarray        # (ticks, 182): t then the 181 activities
    status: str
    duration: float
    final_target: tuple[float, float] | None
    script: ScenarioScript

    def positions(self) -> np.ndarray:
        return np.array([s.p for s in self.samples])


def _fmt(x: float) -> str:
    return repr(float(x))


def trajectory_csv(log: TrajectoryLog) -> str:
    lines = ["t,px,py,vx,vy,ux,uy,winner,active_count"]
    for s in log.samples:
        win = "" if s.winner is None else str(s.winner)
        lines.append(
            f"{_fmt(s.t)},{_fmt(s.p[0])},{_fmt(s.p[1])},{_fmt(s.v[0])},{_fmt(s.v[1])},"
            f"{_fmt(s.u[0])},{_fmt(s.u[1])},{win},{s.active_count}"
        )
    return "\n".join(lines) + "\n"


def field_history_csv(log: TrajectoryLog) -> str:
    header = "t," + ",".join(f"u_{j}" for j in range(dnf.N_NEURONS))
    lines = [header]
    for row in log.field_history:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


class _BaselineDriver:
    """Cubic-profile state machine for the comparison controller.

    Re-fits from the current position (zero assumed initial velocity) whenever
    the selected target disappears or moves; a visible stop cue triggers a
    smooth cosine ramp-down of the current velocity.
    """

    def __init__(self, cfg: SimConfig, script: ScenarioScript, duration_override: float | None):
        self.cfg = cfg
        self.budget = duration_override or script.poly_duration_s
        self.profile: baseline.CubicProfile | None = None
        self.t_fit: float = 0.0
        self.t_first_fit: float | None = None
        self.selected_id: int | None = None
        self.ramp: tuple[float, np.ndarray, np.ndarray] | None = None  # (t0, p0, v0)
        self.hold: np.ndarray | None = None

    def _fit(self, p_now, goal, t: float) -> None:
        dist = float(np.hypot(goal[0] - p_now[0], goal[1] - p_now[1]))
        if self.t_first_fit is None:
            self.t_first_fit = t
        budget = self.budget if self.budget is not None else dist / self.cfg.control.v_nominal
        remaining = budget - (t - self.t_first_fit)
        # keep the analytic peak speed 1.5*d/T under the plant cap
        floor = 1.05 * 1.5 * dist / self.cfg.control.speed_limit
        T = max(remaining, floor, 10 * self.cfg.dt)
        self.profile = baseline.make_profile(tuple(p_now), tuple(goal), T)
        self.t_fit = t

    def command(self, tracks, state: PlantState, t: float):
        """Return (p, v, u) for this tick; positions drive the plant kinematically."""
        dt = self.cfg.dt
        if self.ramp is not None:
            t0, p0, v0 = self.ramp
            tb = self.cfg.brake_ramp_s
            s = t + dt - t0
            if s >= tb:
                if self.hold is None:
                    self.hold = p0 + v0 * (0.5 * tb)
                return self.hold, np.zeros(2), np.zeros(2)
            pos = p0 + v0 * (0.5 * s + tb / (2 * math.pi) * math.sin(math.pi * s / tb))
            vel = v0 * 0.5 * (1 + math.cos(math.pi * s / tb))
            acc = -v0 * math.pi / (2 * tb) * math.sin(math.pi * s / tb)
            return pos, vel, acc
        if any(tr.visible and tr.color_class == "green" for tr in tracks):
            self.ramp = (t, np.array(state.p), np.array(state.v))
            return self.command(tracks, state, t)
        oranges = [tr for tr in tracks if tr.visible and tr.color_class == "orange"]
        if not oranges:
            return np.array(state.p), np.zeros(2), np.zeros(2)
        current = next((tr for tr in oranges if tr.id == self.selected_id), None)
        if current is None:
            current = min(oranges, key=lambda tr: math.hypot(tr.pos_real[0] - state.p[0], tr.pos_real[1] - state.p[1]))
            self.selected_id = current.id
            self._fit(state.p, current.pos_real, t)
        elif self.profile is not None:
            drift = math.hypot(current.pos_real[0] - self.profile.goal[0], current.pos_real[1] - self.profile.goal[1])
            if drift > self.cfg.replan_drift:
                self._fit(state.p, current.pos_real, t)
        assert self.profile is not None
        tau = min(t + dt - self.t_fit, self.profile.T)
        pos, vel = baseline.sample_trajectory(self.profile, tau)
        acc = baseline.accel_at(self.profile, tau)
        return pos, vel, acc


@dataclass
class _BankEntry:
    policy: policy.ReachPolicy
    birth_tick: int
    target: np.ndarray


class Simulation:
    """Owns all per-run state; stepped one control tick at a time."""

    def __init__(self, script: ScenarioScript, cfg: SimConfig = SimConfig(), poly_duration: float | None = None):
        try:
            validate_script(script)
        except ValidationError as exc:
            raise ScenarioInvalid(str(exc)) from exc
        self.script = script
        self.cfg = cfg
        self.rng = np.random.default_rng(script.seed)
        self.tick = 0
        self.plant = PlantState(p=(0.0, 0.0), v=(0.0, 0.0), t=0.0)
        self.scene: dict[int, SceneBeacon] = {}
        self._beacon_count = 0
        self._pending = list(script.events)
        self.tracker = BeaconTracker(cfg.calib, cfg.tracker)
        self.fstate = dnf.initial_state(cfg.field)
        self._kernel = dnf.lateral_kernel(cfg.field)
        self.pause_level = 0.0
        self.bank: dict[int, _BankEntry] = {}
        self._gain_cache: dict[int, np.ndarray] = {}
        self._frame_count = 0
        self._driver = _BaselineDriver(cfg, script, poly_duration) if script.controller == "poly" else None
        self.samples: list[Sample] = []
        self._field_rows: list[np.ndarray] = []
        self.status: str | None = None
        self._stop_cue_seen = False
        self._injected: list[ScenarioEvent] = []

    # -- scene events ------------------------------------------------------

    def _apply_event(self, ev: ScenarioEvent) -> None:
        if ev.action == ADD:
            self.scene[self._beacon_count] = SceneBeacon(self._beacon_count, ev.color, tuple(ev.pos_cm))
            self._beacon_count += 1
        elif ev.action == REMOVE:
            self.scene.pop(ev.id, None)
        elif ev.action == MOVE:
            if ev.id in self.scene:
                self.scene[ev.id].pos = tuple(ev.pos_cm)

    def inject_event(self, ev: ScenarioEvent) -> ScenarioEvent:
        """Apply a live event at the next tick boundary; returns it stamped with that time."""
        stamped = replace(ev, t=round((self.tick) * self.cfg.dt, 9))
        self._apply_event(stamped)
        self._injected.append(stamped)
        return stamped

    # -- sensing -----------------------------------------------------------

    def _render_frame(self) -> RasterImage:
        calib = self.cfg.calib
        img = RasterImage.filled(int(calib.x_max_prime), int(calib.y_max_prime))
        radius = BALL_RADIUS_CM / calib.width * calib.x_max_prime
        for b in self.scene.values():
            rgb = ORANGE_RGB if b.color == "orange" else GREEN_RGB
            img.draw_disc(world_to_pixel(calib, b.pos), radius, rgb)
        return img

    def _sense(self, t: float) -> None:
        if t + 1e-9 < self._frame_count / self.cfg.sensor_fps:
            return
        self._frame_count += 1
        if self.cfg.vision_mode:
            blobs = segment_beacons(self._render_frame(), self.cfg.segmentation)
        else:
            radius = BALL_RADIUS_CM / self.cfg.calib.width * self.cfg.calib.x_max_prime
            area = int(math.pi * radius * radius)
            blobs = [
                Blob(b.color, world_to_pixel(self.cfg.calib, b.pos), area)
                for b in self.scene.values()
            ]
        self.tracker.update(blobs, t)

    # -- controller bank ---------------------------------------------------

    def _policy_for(self, prob: policy.PolicyProblem) -> policy.ReachPolicy:
        # gains depend only on the horizon for fixed weights; cache per run
        gains = self._gain_cache.get(prob.horizon)
        if gains is None:
            solved = policy.solve_policy(prob)
            self._gain_cache[prob.horizon] = solved.gains
            return solved
        x_goal = np.array([prob.target[0], prob.target[1], 0.0, 0.0])
        return policy.ReachPolicy(gains=gains, feedforward=gains @ x_goal, target=prob.target.copy(), horizon=prob.horizon)

    def _sync_bank(self, active: tuple[int, ...], candidates: list[tuple[float, float, tuple[float, float]]]) -> None:
        """candidates: (direction deg, distance, world pos) per usable reach beacon."""
        cfg = self.cfg
        ee = np.array([self.plant.p[0], self.plant.p[1], self.plant.v[0], self.plant.v[1]])
        for j in list(self.bank):
            if j not in active:
                del self.bank[j]
        for j in active:
            if not candidates:
                self.bank.pop(j, None)
                continue
            theta, r, _pos = min(candidates, key=lambda c: abs(c[0] - j))
            phi = math.radians(j)
            desired = np.array([self.plant.p[0] + r * math.cos(phi), self.plant.p[1] + r * math.sin(phi)])
            entry = self.bank.get(j)
            expired = entry is not None and (self.tick - entry.birth_tick + 1) > entry.policy.horizon - 1
            drifted = entry is not None and float(np.hypot(*(desired - entry.target))) > cfg.replan_drift
            if entry is None or expired or drifted:
                try:
                    prob = policy.make_problem(ee, float(j), r, cfg.control, cfg.dt)
                except DegenerateReach:
                    self.bank.pop(j, None)
                    continue
                self.bank[j] = _BankEntry(policy=self._policy_for(prob), birth_tick=self.tick, target=desired)

    # -- main loop ---------------------------------------------------------

    @property
    def finished(self) -> bool:
        return self.status is not None

    def step(self) -> Sample:
        assert not self.finished, "simulation already finished"
        cfg = self.cfg
        t = self.tick * cfg.dt
        while self._pending and self._pending[0].t <= t + 1e-9:
            self._apply_event(self._pending.pop(0))
        self._sense(t)
        tracks = self.tracker.snapshot()
        stop_visible = any(tr.visible and tr.color_class == "green" for tr in tracks)
        self._stop_cue_seen = self._stop_cue_seen or stop_visible

        if self._driver is not None:
            pos, vel, acc = self._driver.command(tracks, self.plant, t)
            sample = Sample(
                t=t, p=self.plant.p, v=self.plant.v, u=(float(acc[0]), float(acc[1])),
                winner=None, active_count=0, desirability=(),
                beacons=tuple(tr.to_json() for tr in tracks),
            )
            self.plant = PlantState(p=(float(pos[0]), float(pos[1])), v=(float(vel[0]), float(vel[1])), t=t + cfg.dt)
        else:
            self.pause_level = dnf.step_pause(self.pause_level, stop_visible, cfg.field)
            candidates = []
            targets = []
            for tr in tracks:
                if not tr.visible or tr.color_class != "orange":
                    continue
                r = math.hypot(tr.pos_real[0] - self.plant.p[0], tr.pos_real[1] - self.plant.p[1])
                theta = dnf.target_direction(self.plant.p, tr.pos_real, strict=False)
                if theta is None or r < 0.1:
                    continue
                candidates.append((theta, r, tr.pos_real))
                targets.append((tr.pos_real, 1.0))
            diag = math.hypot(*self.script.workspace)
            inputs = dnf.compose_inputs(targets, self.pause_level, self.plant.p, cfg.field, diag, strict=False)
            self.fstate = dnf.step_field(self.fstate, inputs, cfg.field, self.rng, self._kernel)
            des = dnf.desirability(self.fstate, cfg.field.theta_init)
            win = dnf.winner(self.fstate, cfg.field.theta_init)
            self._sync_bank(des.active_set, candidates)
            x = np.array([self.plant.p[0], self.plant.p[1], self.plant.v[0], self.plant.v[1]])
            entries = []
            weights = []
            for j, entry in self.bank.items():
                entries.append((entry.policy, self.tick - entry.birth_tick + 1))
                if cfg.control.wta_only:
                    weights.append(1.0 if j == win else 0.0)
                else:
                    weights.append(float(des.d[j]))
            u = policy.blend_commands(entries, weights, x, np.array(self.plant.v), cfg.control)
            sparse = tuple((j, float(des.d[j])) for j in des.active_set)
            sample = Sample(
                t=t, p=self.plant.p, v=self.plant.v, u=(float(u[0]), float(u[1])),
                winner=win, active_count=len(des.active_set), desirability=sparse,
                beacons=tuple(tr.to_json() for tr in tracks),
            )
            self._field_rows.append(np.concatenate([[t], self.fstate.u]))
            self.plant = plant_step(self.plant, u, cfg.dt, cfg.control.speed_limit, self.script.workspace)

        self.samples.append(sample)
        self.tick += 1
        self._check_termination()
        return sample

    def _check_termination(self) -> None:
        t = self.tick * self.cfg.dt
        speed = self.plant.speed
        target = self.nearest_scene_target()
        if target is not None and speed < self.cfg.goal_speed_eps:
            err = math.hypot(target[0] - self.plant.p[0], target[1] - self.plant.p[1])
            if err < self.cfg.goal_pos_eps and t > 2 * self.cfg.dt:
                self.status = STATUS_REACHED
                return
        if self._stop_cue_seen and speed < self.cfg.goal_speed_eps:
            self.status = STATUS_STOPPED
            return
        if t >= self.script.time_limit - 1e-9:
            self.status = STATUS_TIMEOUT

    def nearest_scene_target(self) -> tuple[float, float] | None:
        oranges = [b.pos for b in self.scene.values() if b.color == "orange"]
        if not oranges:
            return None
        return min(oranges, key=lambda p: math.hypot(p[0] - self.plant.p[0], p[1] - self.plant.p[1]))

    def to_log(self) -> TrajectoryLog:
        rows = np.array(self._field_rows) if self._field_rows else np.empty((0, dnf.N_NEURONS + 1))
        return TrajectoryLog(
            samples=self.samples,
            field_history=rows,
            status=self.status if self.status is not None else "running",
            duration=self.tick * self.cfg.dt,
            final_target=self.nearest_scene_target(),
            script=self.script,
        )

    def run(self) -> TrajectoryLog:
        while not self.finished:
            self.step()
        return self.to_log()

    def recorded_script(self) -> ScenarioScript:
        """The scripted plus live-injected events as a replayable scenario."""
        events = sorted(list(self.script.events) + self._injected, key=lambda e: e.t)
        return replace(self.script, events=tuple(events))


def run_scenario(
    script: ScenarioScript,
    cfg: SimConfig = SimConfig(),
    poly_duration: float | None = None,
) -> tuple[TrajectoryLog, dict]:
    """Run one scenario to completion; returns the log and its metrics bundle."""
    log = Simulation(script, cfg, poly_duration).run()
    return log, compute_metrics(log, cfg.dt)


def compute_metrics(log: TrajectoryLog, dt: float) -> dict:
    """Metrics bundle for one run; degenerate measures are reported as None."""
    positions = log.positions()
    out: dict = {
        "status": log.status,
        "duration_s": log.duration,
        "final_target": list(log.final_target) if log.final_target else None,
    }
    try:
        deriv = metrics.derivative_stats(positions, dt)
        out.update(
            path_length=metrics.path_length(positions),
            d2_variance=metrics.second_derivative_variance(positions),
            **deriv,
        )
    except TooFewSamples:
        return out
    final_p = positions[-1]
    if log.final_target is not None:
        out["err_x"] = abs(float(final_p[0]) - log.final_target[0])
        out["err_y"] = abs(float(final_p[1]) - log.final_target[1])
    for name, fn in (("r2", metrics.straightness_r2), ("fractal_slope", metrics.fractal_slope)):
        try:
            out[name] = fn(positions)
        except (DegeneratePath, TooFewSamples):
            out[name] = None
    return out
