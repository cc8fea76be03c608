"""Command-line entry points: run, compare, scenarios, serve."""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .engine import SimConfig, run_scenario, trajectory_csv, field_history_csv
from .errors import NeucfError, ParseError, ValidationError
from .field import FieldParams
from .policy import ControlConfig
from .scenario import ScenarioScript, builtin_scenarios, parse_scenario
from .tracking import TrackerConfig

log = logging.getLogger("neucf")


@dataclasses.dataclass
class RunConfig:
    scenario: str
    controller: str | None = None
    seed: int | None = None
    out: str | None = None
    dt: float | None = None
    vision_mode: bool = False
    overrides: dict = dataclasses.field(default_factory=dict)


def _load_script(ref: str) -> ScenarioScript:
    if ref.startswith("builtin:"):
        name = ref.split(":", 1)[1]
        scripts = builtin_scenarios()
        if name not in scripts:
            raise ValidationError(f"unknown builtin scenario {name!r}; have {sorted(scripts)}")
        return scripts[name]
    path = Path(ref)
    if not path.exists():
        raise FileNotFoundError(f"scenario file not found: {path}")
    return parse_scenario(path.read_text())


def _build_sim_config(cfg: RunConfig) -> SimConfig:
    over = cfg.overrides
    field_params = FieldParams(**over.get("field", {}))
    control = ControlConfig(**over.get("control", {}))
    tracker = TrackerConfig(**over.get("tracker", {}))
    sim_kwargs = dict(over.get("sim", {}))
    if cfg.dt is not None:
        sim_kwargs["dt"] = cfg.dt
        field_params = dataclasses.replace(field_params, dt=cfg.dt)
    if cfg.vision_mode:
        sim_kwargs["vision_mode"] = True
    return SimConfig(field=field_params, control=control, tracker=tracker, **sim_kwargs)


def _effective_script(script: ScenarioScript, cfg: RunConfig) -> ScenarioScript:
    if cfg.controller is not None:
        script = dataclasses.replace(script, controller=cfg.controller)
    if cfg.seed is not None:
        script = dataclasses.replace(script, seed=cfg.seed)
    return script


def cmd_run(cfg: RunConfig) -> int:
    script = _effective_script(_load_script(cfg.scenario), cfg)
    sim_cfg = _build_sim_config(cfg)
    log.info("running %s with %s controller, seed %d", script.name, script.controller, script.seed)
    traj, bundle = run_scenario(script, sim_cfg)
    out = Path(cfg.out or f"out_{script.name}_{script.controller}_s{script.seed}")
    out.mkdir(parents=True, exist_ok=True)
    (out / "trajectory.csv").write_text(trajectory_csv(traj))
    (out / "field_history.csv").write_text(field_history_csv(traj))
    (out / "metrics.json").write_text(json.dumps(bundle, indent=2, sort_keys=True) + "\n")
    meta = {
        "version": __version__,
        "seed": script.seed,
        "scenario": script.to_json(),
        "dt": sim_cfg.dt,
        "vision_mode": sim_cfg.vision_mode,
        "overrides": cfg.overrides,
        "status": traj.status,
    }
    (out / "run_meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    print(f"{script.name}: {traj.status} in {traj.duration:.2f}s -> {out}")
    return 0


_ROW_LABELS = [
    ("err_x", "X Error (cm)"),
    ("err_y", "Y Error (cm)"),
    ("path_length", "Path Length (cm)"),
    ("r2", "Straightness r^2"),
    ("accel", "Acceleration (cm/s^2)"),
    ("jerk", "Jerk (cm/s^3)"),
    ("d2_variance", "2nd Der. Variance"),
    ("fractal_slope", "Fractal Dimension"),
]


def _aggregate(bundles: list[dict]) -> dict:
    """Mean (and std where the table reports a spread) over repeat runs."""
    out: dict = {"repeats": len(bundles), "failed": sum(b is None for b in bundles)}
    good = [b for b in bundles if b is not None]
    if not good:
        return out

    def collect(key):
        vals = [b[key] for b in good if b.get(key) is not None]
        return np.array(vals) if vals else None

    for key in ("err_x", "err_y"):
        vals = collect(key)
        if vals is not None:
            out[key] = {"mean": float(vals.mean()), "std": float(vals.std())}
    for key in ("path_length", "r2", "d2_variance", "fractal_slope", "duration_s"):
        vals = collect(key)
        if vals is not None:
            out[key] = float(vals.mean())
    for key in ("accel", "jerk"):
        means, stds = collect(f"{key}_mean"), collect(f"{key}_std")
        if means is not None:
            out[key] = {"mean": float(means.mean()), "std": float(stds.mean())}
    return out


def _cell(agg: dict, key: str) -> str:
    v = agg.get(key)
    if v is None:
        return "-"
    if isinstance(v, dict):
        return f"{v['mean']:.4g} ± {v['std']:.3g}"
    if key == "d2_variance":
        return f"{v:.3e}"
    return f"{v:.4g}"


def cmd_compare(scenarios: list[str], repeats: int, seed0: int, out_dir: str | None, cfg: RunConfig) -> int:
    if repeats < 1:
        raise ValidationError("repeats must be at least 1")
    sim_cfg = _build_sim_config(cfg)
    report: dict = {}
    lines: list[str] = []
    for ref in scenarios:
        base = _load_script(ref)
        cells: dict[str, list] = {"neucf": [], "poly": []}
        for rep in range(repeats):
            seed = seed0 + rep
            neu = dataclasses.replace(base, controller="neucf", seed=seed)
            try:
                neu_log, neu_m = run_scenario(neu, sim_cfg)
                cells["neucf"].append(neu_m)
                duration = neu_log.duration
            except NeucfError as exc:
                log.error("neucf run failed on %s seed %d: %s", base.name, seed, exc)
                cells["neucf"].append(None)
                duration = None
            pol = dataclasses.replace(base, controller="poly", seed=seed)
            try:
                _, pol_m = run_scenario(pol, sim_cfg, poly_duration=duration)
                cells["poly"].append(pol_m)
            except NeucfError as exc:
                log.error("poly run failed on %s seed %d: %s", base.name, seed, exc)
                cells["poly"].append(None)
        agg = {ctrl: _aggregate(bundles) for ctrl, bundles in cells.items()}
        report[base.name] = agg
        lines.append(f"\nscenario: {base.name} ({repeats} repeats, seeds {seed0}..{seed0 + repeats - 1})")
        lines.append(f"  {'metric':<22} {'NeuCF':>18} {'Polynomial':>18}")
        for key, label in _ROW_LABELS:
            n, p = _cell(agg["neucf"], key), _cell(agg["poly"], key)
            if n == p == "-":
                continue
            lines.append(f"  {label:<22} {n:>18} {p:>18}")
        failed = agg["neucf"]["failed"] + agg["poly"]["failed"]
        if failed:
            lines.append(f"  FAILED cells: {failed}")
    text = "\n".join(lines).lstrip("\n") + "\n"
    print(text, end="")
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "compare.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
        (out / "compare.txt").write_text(text)
    return 0


def cmd_scenarios(as_json: bool) -> int:
    scripts = builtin_scenarios()
    if as_json:
        print(json.dumps({name: s.to_json() for name, s in scripts.items()}, indent=2, sort_keys=True))
    else:
        for name, s in scripts.items():
            kinds = [e.action for e in s.events]
            print(f"builtin:{name:<10} {len(s.events)} events ({', '.join(kinds)}), time limit {s.time_limit}s")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="neucf", description=__doc__)
    parser.add_argument("--version", action="version", version=f"neucf {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--controller", choices=("neucf", "poly"))
        p.add_argument("--seed", type=int)
        p.add_argument("--dt", type=float)
        p.add_argument("--vision-mode", action="store_true")
        p.add_argument("--config", type=str, help="JSON overrides {field/control/tracker/sim: {...}}")

    run_p = sub.add_parser("run", help="run one scenario and write its artifacts")
    run_p.add_argument("--scenario", required=True, help="builtin:<name> or a .scenario.json path")
    run_p.add_argument("--out", type=str)
    add_common(run_p)

    cmp_p = sub.add_parser("compare", help="run both controllers over scenarios and tabulate metrics")
    cmp_p.add_argument("--scenario", action="append", required=True, dest="scenarios")
    cmp_p.add_argument("--repeats", type=int, default=3)
    cmp_p.add_argument("--out", type=str)
    add_common(cmp_p)

    sub.add_parser("scenarios", help="list builtin scenarios").add_argument("--json", action="store_true")

    serve_p = sub.add_parser("serve", help="serve the live session API and operator panel")
    serve_p.add_argument("--port", type=int, default=8733)
    serve_p.add_argument("--host", type=str, default="127.0.0.1")
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("NEUCF_LOG", "WARNING").upper())
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = RunConfig(
                scenario=args.scenario,
                controller=args.controller,
                seed=args.seed,
                out=args.out,
                dt=args.dt,
                vision_mode=args.vision_mode,
                overrides=json.loads(args.config) if args.config else {},
            )
            return cmd_run(cfg)
        if args.command == "compare":
            cfg = RunConfig(
                scenario="",
                controller=args.controller,
                dt=args.dt,
                vision_mode=args.vision_mode,
                overrides=json.loads(args.config) if args.config else {},
            )
            return cmd_compare(args.scenarios, args.repeats, args.seed or 0, args.out, cfg)
        if args.command == "scenarios":
            return cmd_scenarios(args.json)
        if args.command == "serve":
            from .service import serve
            serve(host=args.host, port=args.port)
            return 0
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NeucfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
