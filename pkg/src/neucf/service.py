"""Live session service.

Exposes one simulation per session over HTTP + WebSocket so an operator can
add, move, and remove beacons while the controller re-plans. Commands are
validated on receipt, enqueued, and applied at the next control-tick
boundary, which makes a live session exactly equivalent to a scripted run;
every applied event is recorded so the session can be replayed headless.

Snapshots are published at a fixed wall rate with a newest-wins policy: a
slow client only delays its own stream, never the simulation loop.
"""
from __future__ import annotations

import asyncio
import math
import uuid
from collections import deque
from pathlib import Path

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .engine import SimConfig, Simulation
from .errors import SessionNotFinished
from .scenario import ADD, COLORS, MOVE, REMOVE, ScenarioEvent, ScenarioScript, builtin_scenarios

SNAPSHOT_HZ = 20.0
SLICE_S = 0.05
FIELD_STRIDE = 2          # published field vector is every 2nd neuron (91 values)
HIT_RADIUS_CM = 5.0       # track-to-scene resolution for remove/move

IDLE, RUNNING, FINISHED = "idle", "running", "finished"


class Session:
    """Synchronous session core; the async shell paces it against wall time."""

    def __init__(self, session_id: str, cfg: SimConfig = SimConfig()):
        self.id = session_id
        self.cfg = cfg
        self.phase = IDLE
        self.sim: Simulation | None = None
        self.seq = 0
        self.speed = 1.0
        self.pending: deque[ScenarioEvent] = deque()
        self._loop_task: asyncio.Task | None = None

    # -- commands ----------------------------------------------------------

    def _nack(self, cmd: str, reason: str) -> dict:
        return {"type": "nack", "cmd": cmd, "reason": reason}

    def _resolve_track(self, track_id: int, pos_required: bool = False):
        """Map a track id the operator sees onto the scene beacon it tracks."""
        assert self.sim is not None
        track = next((tr for tr in self.sim.tracker.snapshot() if tr.id == track_id), None)
        if track is None:
            return None
        best, best_d = None, HIT_RADIUS_CM
        for beacon in self.sim.scene.values():
            if beacon.color != track.color_class:
                continue
            d = math.hypot(beacon.pos[0] - track.pos_real[0], beacon.pos[1] - track.pos_real[1])
            if d < best_d:
                best, best_d = beacon, d
        return best

    def handle(self, cmd: dict) -> dict:
        """Validate one client command; beacon edits are queued for the next tick."""
        kind = cmd.get("type", "")
        if kind == "start":
            if self.phase == RUNNING:
                return self._nack(kind, "already running")
            controller = cmd.get("controller", "neucf")
            if controller not in ("neucf", "poly"):
                return self._nack(kind, f"unknown controller {controller!r}")
            script = ScenarioScript(
                name=f"live-{self.id[:8]}",
                seed=int(cmd.get("seed", 0)),
                controller=controller,
            )
            self.sim = Simulation(script, self.cfg)
            self.pending.clear()
            self.phase = RUNNING
            return {"type": "ack", "cmd": kind}
        if kind == "reset":
            self.sim = None
            self.pending.clear()
            self.phase = IDLE
            return {"type": "ack", "cmd": kind}
        if kind == "set_speed":
            mult = float(cmd.get("multiplier", 1.0))
            if not (0.01 <= mult <= 16.0):
                return self._nack(kind, "multiplier out of range")
            self.speed = mult
            return {"type": "ack", "cmd": kind}
        if kind in (ADD, REMOVE, MOVE):
            if self.phase != RUNNING or self.sim is None:
                return self._nack(kind, "no running simulation")
            if kind == ADD:
                color = cmd.get("color")
                if color not in COLORS:
                    return self._nack(kind, f"bad color {color!r}")
                pos = cmd.get("pos_cm")
                if not self._in_workspace(pos):
                    return self._nack(kind, "position outside workspace")
                self.pending.append(ScenarioEvent(t=0.0, action=ADD, color=color, pos_cm=(pos[0], pos[1])))
            else:
                beacon = self._resolve_track(int(cmd.get("id", -1)))
                if beacon is None:
                    return self._nack(kind, "unknown id")
                if kind == MOVE:
                    pos = cmd.get("pos_cm")
                    if not self._in_workspace(pos):
                        return self._nack(kind, "position outside workspace")
                    self.pending.append(ScenarioEvent(t=0.0, action=MOVE, id=beacon.id, pos_cm=(pos[0], pos[1])))
                else:
                    self.pending.append(ScenarioEvent(t=0.0, action=REMOVE, id=beacon.id))
            return {"type": "ack", "cmd": kind}
        return self._nack(kind or "?", "unknown command")

    def _in_workspace(self, pos) -> bool:
        if not isinstance(pos, (list, tuple)) or len(pos) != 2:
            return False
        w, h = self.sim.script.workspace if self.sim else (52.0, 47.0)
        return 0 <= pos[0] <= w and 0 <= pos[1] <= h

    # -- stepping ----------------------------------------------------------

    def advance(self, n_ticks: int) -> None:
        """Apply queued events at the tick boundary, then step the slice."""
        if self.phase != RUNNING or self.sim is None:
            return
        while self.pending:
            self.sim.inject_event(self.pending.popleft())
        for _ in range(n_ticks):
            self.sim.step()
            if self.sim.finished:
                self.phase = FINISHED
                break

    def snapshot_message(self, detail: bool = False) -> dict:
        self.seq += 1
        msg: dict = {"type": "snapshot", "seq": self.seq, "phase": self.phase}
        if self.sim is None:
            msg.update(t=0.0, ee={"p": [0.0, 0.0], "v": [0.0, 0.0]}, beacons=[])
            return msg
        sim = self.sim
        msg.update(
            t=round(sim.tick * self.cfg.dt, 9),
            ee={"p": list(sim.plant.p), "v": list(sim.plant.v)},
            beacons=[tr.to_json() for tr in sim.tracker.snapshot()],
        )
        if self.phase in (RUNNING, FINISHED):
            u = sim.fstate.u if detail else sim.fstate.u[::FIELD_STRIDE]
            last = sim.samples[-1] if sim.samples else None
            msg["field"] = [float(x) for x in u]
            msg["desirability"] = [[j, w] for j, w in (last.desirability if last else ())]
            msg["winner"] = last.winner if last else None
            msg["status"] = sim.status
        return msg

    def recorded_script(self) -> ScenarioScript:
        if self.phase != FINISHED or self.sim is None:
            raise SessionNotFinished("recording is available once the run has finished")
        return self.sim.recorded_script()


async def _session_loop(session: Session) -> None:
    """Paced driver: advances sim time at wall time x speed, in tick slices."""
    dt = session.cfg.dt
    carry = 0.0
    while session.phase == RUNNING:
        carry += SLICE_S * session.speed / dt
        n = int(carry)
        carry -= n
        session.advance(n)
        await asyncio.sleep(SLICE_S)


def _panel_dir() -> Path | None:
    root = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return root if root.is_dir() else None


def create_app(cfg: SimConfig = SimConfig()) -> FastAPI:
    app = FastAPI(title="neucf session service")
    sessions: dict[str, Session] = {}
    app.state.sessions = sessions

    @app.post("/session")
    def create_session():
        sid = uuid.uuid4().hex
        sessions[sid] = Session(sid, cfg)
        return {"id": sid}

    @app.get("/scenarios")
    def list_scenarios():
        return {name: s.to_json() for name, s in builtin_scenarios().items()}

    @app.get("/session/{sid}/record")
    def record(sid: str):
        session = sessions.get(sid)
        if session is None:
            raise HTTPException(404, "unknown session")
        try:
            script = session.recorded_script()
        except SessionNotFinished as exc:
            raise HTTPException(409, str(exc)) from exc
        return JSONResponse(script.to_json())

    @app.websocket("/ws/session/{sid}")
    async def ws_session(ws: WebSocket, sid: str):
        session = sessions.get(sid)
        if session is None:
            await ws.close(code=4004)
            return
        await ws.accept()
        detail = False

        async def publisher():
            last_seq = -1
            while True:
                msg = session.snapshot_message(detail)
                if msg["seq"] != last_seq:
                    last_seq = msg["seq"]
                    await ws.send_json(msg)
                await asyncio.sleep(1.0 / SNAPSHOT_HZ)

        pub = asyncio.create_task(publisher())
        try:
            while True:
                cmd = await ws.receive_json()
                if cmd.get("type") == "detail":
                    detail = bool(cmd.get("enabled", False))
                    await ws.send_json({"type": "ack", "cmd": "detail"})
                    continue
                reply = session.handle(cmd)
                if cmd.get("type") == "start" and reply["type"] == "ack":
                    if session._loop_task is None or session._loop_task.done():
                        session._loop_task = asyncio.create_task(_session_loop(session))
                await ws.send_json(reply)
        except WebSocketDisconnect:
            pass
        finally:
            pub.cancel()

    panel = _panel_dir()
    if panel is not None:
        app.mount("/", StaticFiles(directory=str(panel), html=True), name="panel")
    else:
        @app.get("/")
        def index():
            return {"service": "neucf", "panel": "not built; see frontend/README"}

    return app


def serve(host: str = "127.0.0.1", port: int = 8733, cfg: SimConfig = SimConfig()) -> None:
    import uvicorn

    uvicorn.run(create_app(cfg), host=host, port=port, log_level="info")
