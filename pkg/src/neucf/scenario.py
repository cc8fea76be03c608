"""Scenario scripts: timed beacon events, validation, and the five builtins.

A script is JSON on disk (extension .scenario.json). Beacon ids referenced by
remove/move events are implicit: the n-th add_beacon event creates beacon n.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import ParseError, ValidationError

ADD, REMOVE, MOVE = "add_beacon", "remove_beacon", "move_beacon"
COLORS = ("orange", "green")
CONTROLLERS = ("neucf", "poly")
MAX_TIME_LIMIT = 36.0


@dataclass(frozen=True)
class ScenarioEvent:
    t: float
    action: str                              # add_beacon | remove_beacon | move_beacon
    color: str | None = None                 # add only
    pos_cm: tuple[float, float] | None = None  # add / move
    id: int | None = None                    # remove / move

    def to_json(self) -> dict:
        doc: dict = {"t": self.t, "action": self.action}
        if self.color is not None:
            doc["color"] = self.color
        if self.pos_cm is not None:
            doc["pos_cm"] = list(self.pos_cm)
        if self.id is not None:
            doc["id"] = self.id
        return doc


@dataclass(frozen=True)
class ScenarioScript:
    name: str
    seed: int = 0
    time_limit: float = MAX_TIME_LIMIT
    controller: str = "neucf"
    workspace: tuple[float, float] = (52.0, 47.0)
    events: tuple[ScenarioEvent, ...] = ()
    poly_duration_s: float | None = None     # baseline budget for standalone runs

    def to_json(self) -> dict:
        doc = {
            "name": self.name,
            "seed": self.seed,
            "time_limit": self.time_limit,
            "controller": self.controller,
            "workspace": {"width": self.workspace[0], "height": self.workspace[1]},
            "events": [e.to_json() for e in self.events],
        }
        if self.poly_duration_s is not None:
            doc["poly_duration_s"] = self.poly_duration_s
        return doc


def validate_script(script: ScenarioScript) -> None:
    """Raise ValidationError on any violated script invariant."""
    if script.controller not in CONTROLLERS:
        raise ValidationError(f"unknown controller {script.controller!r}")
    w, h = script.workspace
    if w <= 0 or h <= 0:
        raise ValidationError("workspace extents must be positive")
    if not (0 < script.time_limit <= MAX_TIME_LIMIT):
        raise ValidationError(f"time_limit must be in (0, {MAX_TIME_LIMIT}]")
    n_beacons = 0
    last_t = -1.0
    for ev in script.events:
        if ev.t < last_t:
            raise ValidationError("events must be sorted by time")
        last_t = ev.t
        if ev.t < 0 or ev.t > script.time_limit:
            raise ValidationError(f"event at t={ev.t} outside [0, time_limit]")
        if ev.action == ADD:
            if ev.color not in COLORS:
                raise ValidationError(f"bad beacon color {ev.color!r}")
            if ev.pos_cm is None:
                raise ValidationError("add_beacon requires pos_cm")
            n_beacons += 1
        elif ev.action == REMOVE:
            if ev.id is None or not (0 <= ev.id < n_beacons):
                raise ValidationError(f"remove_beacon references unknown id {ev.id}")
        elif ev.action == MOVE:
            if ev.id is None or not (0 <= ev.id < n_beacons):
                raise ValidationError(f"move_beacon references unknown id {ev.id}")
            if ev.pos_cm is None:
                raise ValidationError("move_beacon requires pos_cm")
        else:
            raise ValidationError(f"unknown action {ev.action!r}")
        if ev.pos_cm is not None:
            x, y = ev.pos_cm
            if not (0 <= x <= w and 0 <= y <= h):
                raise ValidationError(f"position {ev.pos_cm} outside the {w}x{h} workspace")


_EVENT_KEYS = {"t", "action", "color", "pos_cm", "id"}
_SCRIPT_KEYS = {"name", "seed", "time_limit", "controller", "workspace", "events", "poly_duration_s"}


def parse_scenario(text: str) -> ScenarioScript:
    """Parse and validate scenario JSON; unknown keys are rejected."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed scenario JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError("scenario document must be a JSON object")
    unknown = set(doc) - _SCRIPT_KEYS
    if unknown:
        raise ValidationError(f"unknown scenario keys: {sorted(unknown)}")
    ws = doc.get("workspace", {"width": 52.0, "height": 47.0})
    if set(ws) - {"width", "height"}:
        raise ValidationError("workspace accepts only width and height")
    events = []
    for raw in doc.get("events", []):
        unknown = set(raw) - _EVENT_KEYS
        if unknown:
            raise ValidationError(f"unknown event keys: {sorted(unknown)}")
        if "t" not in raw or "action" not in raw:
            raise ValidationError("every event needs t and action")
        events.append(
            ScenarioEvent(
                t=float(raw["t"]),
                action=str(raw["action"]),
                color=raw.get("color"),
                pos_cm=tuple(raw["pos_cm"]) if "pos_cm" in raw else None,
                id=raw.get("id"),
            )
        )
    script = ScenarioScript(
        name=str(doc.get("name", "unnamed")),
        seed=int(doc.get("seed", 0)),
        time_limit=float(doc.get("time_limit", MAX_TIME_LIMIT)),
        controller=str(doc.get("controller", "neucf")),
        workspace=(float(ws.get("width", 52.0)), float(ws.get("height", 47.0))),
        events=tuple(events),
        poly_duration_s=(None if doc.get("poly_duration_s") is None else float(doc["poly_duration_s"])),
    )
    validate_script(script)
    return script


def serialize_scenario(script: ScenarioScript) -> str:
    return json.dumps(script.to_json(), indent=2, sort_keys=True) + "\n"


def builtin_scenarios(controller: str = "neucf", seed: int = 0) -> dict[str, ScenarioScript]:
    """The five experiment scripts: two static, one stop, two switch.

    Placements keep every target in the representable forward half-plane from
    anywhere along the preceding approach path, and surviving switch targets
    stay ahead of the removed one.
    """

    def script(name, events, poly_T):
        return ScenarioScript(
            name=name,
            seed=seed,
            controller=controller,
            events=tuple(events),
            poly_duration_s=poly_T,
        )

    add = lambda t, color, pos: ScenarioEvent(t=t, action=ADD, color=color, pos_cm=pos)
    remove = lambda t, bid: ScenarioEvent(t=t, action=REMOVE, id=bid)

    return {
        # one stationary target
        "static_1": script("static_1", [add(0.0, "orange", (27.0, 35.0))], 4.0),
        # two stationary targets; the nearer one wins the competition
        "static_2": script(
            "static_2",
            [add(0.0, "orange", (24.0, 18.0)), add(0.0, "orange", (10.0, 43.0))],
            3.5,
        ),
        # stop cue appears mid-reach; the reach is never completed
        "stop": script(
            "stop",
            [add(0.0, "orange", (20.0, 20.0)), add(1.2, "green", (38.0, 10.0))],
            3.0,
        ),
        # the sole target is replaced mid-reach by a new one elsewhere
        "switch_1": script(
            "switch_1",
            [
                add(0.0, "orange", (27.0, 35.0)),
                remove(1.5, 0),
                add(1.5, "orange", (8.0, 44.0)),
            ],
            9.0,
        ),
        # two targets; the selected one is removed mid-reach
        "switch_2": script(
            "switch_2",
            [
                add(0.0, "orange", (24.0, 18.0)),
                add(0.0, "orange", (10.0, 43.0)),
                remove(1.5, 0),
            ],
            9.0,
        ),
    }
