"""Regenerate the golden wire fixtures shared by the service and the panel.

Fixture content is fully deterministic: a fixed session id, seed 0, one
beacon added at tick 100, snapshots taken at fixed ticks.
"""
import json
from pathlib import Path

from neucf.engine import SimConfig
from neucf.service import Session

ROOT = Path(__file__).resolve().parents[1]
OUT = ROOT / "wire_fixtures"


def freeze(name: str, doc: dict) -> None:
    OUT.mkdir(exist_ok=True)
    (OUT / f"{name}.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(f"wrote {name}.json")


def main() -> None:
    session = Session("fixture0sess", SimConfig())
    freeze("snapshot_idle", session.snapshot_message())

    assert session.handle({"type": "start", "controller": "neucf", "seed": 0})["type"] == "ack"
    session.advance(100)
    freeze("ack", {"type": "ack", "cmd": "add_beacon"})
    freeze("nack_unknown_id", {"type": "nack", "cmd": "remove_beacon", "reason": "unknown id"})
    freeze("nack_already_running", {"type": "nack", "cmd": "start", "reason": "already running"})

    reply = session.handle({"type": "add_beacon", "color": "orange", "pos_cm": [27.0, 35.0]})
    assert reply["type"] == "ack"
    session.advance(100)
    freeze("snapshot_running", session.snapshot_message())

    while session.phase == "running":
        session.advance(100)
    freeze("snapshot_finished", session.snapshot_message())

    commands = {
        "cmd_start": {"type": "start", "controller": "neucf", "seed": 0},
        "cmd_reset": {"type": "reset"},
        "cmd_add_beacon": {"type": "add_beacon", "color": "orange", "pos_cm": [27.0, 35.0]},
        "cmd_remove_beacon": {"type": "remove_beacon", "id": 0},
        "cmd_move_beacon": {"type": "move_beacon", "id": 0, "pos_cm": [10.0, 40.0]},
        "cmd_set_speed": {"type": "set_speed", "multiplier": 0.5},
        "cmd_detail": {"type": "detail", "enabled": True},
    }
    for name, doc in commands.items():
        freeze(name, doc)


if __name__ == "__main__":
    main()
