"""Run one dash_and_dine episode and show the cooking economy at work.

Usage: python3 demos/demo_dash_and_dine.py [seed]
"""
from __future__ import annotations

import sys
from collections import Counter

from tacticbench.opponents import BuiltinTeamSystem, builtin
from tacticbench.runner import run_episode
from tacticbench.scenarios import get_scenario
from tacticbench.world import TICKS_PER_SECOND


def main() -> None:
    seed = int(sys.argv[1]) if len(sys.argv) > 1 else 3
    config = get_scenario("dash_and_dine")
    print("recipes on offer:")
    for name, recipe in sorted(config.recipes.items()):
        needs = ", ".join(f"{n} {item}" for item, n in sorted(recipe.inputs.items()))
        extras = []
        if recipe.needs_table:
            extras.append("crafting table")
        if recipe.needs_mob:
            extras.append(f"nearby {recipe.needs_mob}")
        suffix = f"  [{', '.join(extras)}]" if extras else ""
        print(f"  {name:14s} = {needs}{suffix}")

    print(f"\nepisode: cake_beetroot (red) vs potato_cookie (blue), seed {seed}\n")
    systems = {
        "red": BuiltinTeamSystem(builtin("cake_beetroot", "dash_and_dine")),
        "blue": BuiltinTeamSystem(builtin("potato_cookie", "dash_and_dine")),
    }
    result = run_episode(config, systems, seed)

    handed_in: dict[str, Counter] = {"red": Counter(), "blue": Counter()}
    for ev in result.score_log:
        handed_in[ev.team][ev.reason] += 1
    for team in ("red", "blue"):
        print(f"{team} scoring events by reason:")
        for reason, n in handed_in[team].most_common():
            print(f"  {n:3d} x {reason}")

    first = result.first_score_tick
    print(f"\nfirst point at tick {first} "
          f"({first / TICKS_PER_SECOND:.0f}s in: gathering and cooking take a while)")
    print(f"final (raw): red {result.scores['red']} - blue {result.scores['blue']}")
    print(f"final (reported, x{config.report_scale}): "
          f"red {result.reported['red']} - blue {result.reported['blue']}  winner: {result.winner}")


if __name__ == "__main__":
    main()
