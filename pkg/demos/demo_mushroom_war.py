"""Run one mushroom_war episode between two built-in opponents and narrate it.

Usage: python3 demos/demo_mushroom_war.py [seed]
"""
from __future__ import annotations

import sys

from tacticbench.opponents import BuiltinTeamSystem, builtin, list_builtin
from tacticbench.runner import run_episode
from tacticbench.scenarios import get_scenario


def main() -> None:
    seed = int(sys.argv[1]) if len(sys.argv) > 1 else 7
    config = get_scenario("mushroom_war")
    print(f"built-in opponents: {', '.join(list_builtin('mushroom_war'))}")
    print(f"episode: aggressive (red) vs passive (blue), seed {seed}\n")

    systems = {
        "red": BuiltinTeamSystem(builtin("aggressive", "mushroom_war")),
        "blue": BuiltinTeamSystem(builtin("passive", "mushroom_war")),
    }
    result = run_episode(config, systems, seed)

    print("first ten scoring events:")
    for ev in result.score_log[:10]:
        print(f"  tick {ev.tick:5d}  {ev.team:4s} +{ev.points}  ({ev.agent}: {ev.reason})")

    print("\nscore at quarter marks:")
    for frac in (0.25, 0.5, 0.75, 1.0):
        tick = int(config.duration_ticks * frac)
        at = {
            team: max((pts for t, pts in timeline if t <= tick), default=0)
            for team, timeline in result.timelines.items()
        }
        print(f"  tick {tick:5d}  red {at['red']:3d}  blue {at['blue']:3d}")

    print(f"\nfinal: red {result.scores['red']} - blue {result.scores['blue']}"
          f"  winner: {result.winner}  ({result.wall_seconds:.2f}s wall)")
    print("the passive script holds its own slime low so mushrooms regrow;")
    print("the aggressive script spends time raiding, which costs it points.")


if __name__ == "__main__":
    main()
