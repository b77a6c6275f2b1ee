"""Drive the model-based TactiCrafter system with the offline mock chat
client: two episodes against the same opponent, so the second episode runs
the learning updates (causal graph, opponent model, tactic revision).

Usage: python3 demos/demo_tacticrafter_mock.py
"""
from __future__ import annotations

from tacticbench.agents import TactiCrafterSystem, make_mock_client
from tacticbench.opponents import BuiltinTeamSystem, builtin
from tacticbench.runner import run_episode
from tacticbench.scenarios import get_scenario


def main() -> None:
    config = get_scenario("mushroom_war")
    client = make_mock_client(latency=0.0)
    red = TactiCrafterSystem(client)
    blue = BuiltinTeamSystem(builtin("passive", "mushroom_war"))

    for episode, seed in enumerate((11, 12), start=1):
        calls_before = len(client.calls)
        result = run_episode(config, {"red": red, "blue": blue}, seed)
        purposes = [c.purpose for c in client.calls[calls_before:]]
        print(f"episode {episode} (seed {seed}): "
              f"red {result.scores['red']} - blue {result.scores['blue']}  winner {result.winner}")
        print(f"  {len(purposes)} model calls; first few: {purposes[:6]}")

    print("\nlearned tactics:")
    for line in red.tactics.lines:
        print(f"  - {line}")
    print("\nopponent read:")
    print(f"  {red.opponent_tactics.to_text()}")
    print(f"\ncausal graph: {len(red.graph)} relations, e.g.")
    for relation in list(red.graph.relations.values())[:3]:
        print(f"  {relation.action} -> {list(relation.effects)}")


if __name__ == "__main__":
    main()
