"""Run a small benchmark and walk through the files it writes.

Usage: python3 demos/demo_metrics_export.py [output_dir]
"""
from __future__ import annotations

import sys
from pathlib import Path

from tacticbench.bench import RunConfig, run_benchmark


def main() -> None:
    out = sys.argv[1] if len(sys.argv) > 1 else "runs"
    config = RunConfig(
        scenarios=["mushroom_war"],
        opponents=["do_nothing", "passive", "aggressive"],
        episodes=3,
        repeats=1,
        seed=5,
        red_system="builtin:balanced",
        output_dir=out,
    )
    output = run_benchmark(config, folder_name="demo_metrics")
    print(f"run folder: {output.run_dir}\n")

    print(f"{'opponent':12s} {'P':>7s} {'S':>7s} {'D':>7s} {'W':>6s}")
    for m in output.report.matchups:
        v = m.values
        print(f"{m.blue:12s} {v.P:7.2f} {v.S:7.2f} {v.D:7.2f} {v.W:6.2f}")
    agg = output.report.aggregate()
    print(f"{'average':12s} {agg.P:7.2f} {agg.S:7.2f} {agg.D:7.2f} {agg.W:6.2f}")

    print("\nfiles written:")
    for path in sorted(Path(output.run_dir).rglob("*")):
        if path.is_file():
            print(f"  {path.relative_to(output.run_dir)}")


if __name__ == "__main__":
    main()
