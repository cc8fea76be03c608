"""Run both controllers over all builtin scenarios and print the comparison tables.

Static scenarios report positional accuracy and straightness, the stop
scenario adds acceleration/jerk consistency, and the switch scenarios add the
second-derivative variance and box-counting slope. Three repeats per cell,
baseline matched to the measured completion time of each run.

Usage: python scripts/reproduce_tables.py [--repeats N] [--out DIR]
"""
import argparse
import sys

from neucf.cli import RunConfig, cmd_compare


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", type=str, default=None)
    args = parser.parse_args()
    scenarios = [f"builtin:{n}" for n in ("static_1", "static_2", "stop", "switch_1", "switch_2")]
    return cmd_compare(scenarios, args.repeats, args.seed, args.out, RunConfig(scenario=""))


if __name__ == "__main__":
    sys.exit(main())
