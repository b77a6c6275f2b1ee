"""Benchmark orchestration: run configs, seeding, calibration, matchup
loops, and the adaptation / self-play protocols.

A run config selects scenarios, blue-side built-in opponents, the red-side
system, episode counts, and client settings.  Every episode's seed is a
hash of (run seed, scenario, matchup, repeat, episode index) so any single
episode can be replayed in isolation.  Results are flushed to the run
folder as they are produced.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import yaml

from . import __version__
from .agents import (
    CoTTeamSystem,
    HttpChatClient,
    TactiCrafterSystem,
    checkpoint_load,
    checkpoint_save,
    make_mock_client,
)
from .metrics import MatchupMetrics, MetricsReport, compute_metrics, metric_values
from .opponents import BuiltinTeamSystem, RandomTeamSystem, builtin, list_builtin
from .runner import EpisodeResult, run_episode
from .scenarios import SCENARIO_NAMES, get_scenario

CALIBRATION_EPISODES = 20
DEFAULT_EPISODES = 5
DEFAULT_REPEATS = 3


@dataclass
class ClientConfig:
    kind: str = "mock"  # mock | http
    base_url: str = ""
    model: str = ""
    latency: float = 0.0  # synthetic latency for the mock

    def build(self):
        if self.kind == "mock":
            return make_mock_client(latency=self.latency)
        if self.kind == "http":
            if not self.base_url or not self.model:
                raise ValueError("http client needs base_url and model")
            return HttpChatClient(self.base_url, self.model)
        raise ValueError(f"unknown client kind {self.kind!r}")


@dataclass
class RunConfig:
    scenarios: list[str] = field(default_factory=lambda: list(SCENARIO_NAMES))
    opponents: Optional[list[str]] = None  # None: all builtins per scenario
    episodes: int = DEFAULT_EPISODES
    repeats: int = DEFAULT_REPEATS
    seed: int = 0
    red_system: str = "tacticrafter"  # tacticrafter | cot | random | builtin:<name>
    client: ClientConfig = field(default_factory=ClientConfig)
    output_dir: str = "runs"

    def __post_init__(self) -> None:
        if self.episodes < 1:
            raise ValueError("episodes must be >= 1")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        for scenario in self.scenarios:
            if scenario not in SCENARIO_NAMES:
                raise ValueError(f"unknown scenario {scenario!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = dict(data)
        client = data.pop("client", {})
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown run config keys: {sorted(unknown)}")
        return cls(**data, client=ClientConfig(**client))

    @classmethod
    def from_yaml(cls, path: str | Path) -> "RunConfig":
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
        if not isinstance(data, dict):
            raise ValueError("run config must be a mapping")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        return out

    def opponents_for(self, scenario: str) -> list[str]:
        return list(self.opponents) if self.opponents else list(list_builtin(scenario))


def episode_seed(run_seed: int, scenario: str, matchup: str, repeat: int, episode: int) -> int:
    text = f"{run_seed}:{scenario}:{matchup}:{repeat}:{episode}"
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "big")


def make_system(spec: str, scenario: str, client_factory: Callable, seed: int = 0):
    if spec == "tacticrafter":
        return TactiCrafterSystem(client_factory())
    if spec == "cot":
        return CoTTeamSystem(client_factory())
    if spec == "random":
        return RandomTeamSystem(seed)
    if spec.startswith("builtin:"):
        return BuiltinTeamSystem(builtin(spec.split(":", 1)[1], scenario))
    raise ValueError(f"unknown system spec {spec!r}")


# -- calibration ------------------------------------------------------------


def calibrate_sigma(
    scenario: str,
    opponent: str,
    run_seed: int = 0,
    cache_path: Optional[str | Path] = None,
) -> float:
    """Blue opponent's mean reported score over exactly 20 episodes with a
    do-nothing red side; cached per scenario+opponent+code version."""
    key = f"{scenario}:{opponent}:{__version__}"
    cache: dict[str, float] = {}
    if cache_path is not None and Path(cache_path).exists():
        cache = json.loads(Path(cache_path).read_text())
        if key in cache:
            return cache[key]
    config = get_scenario(scenario)
    blue = BuiltinTeamSystem(builtin(opponent, scenario))
    total = 0.0
    for episode in range(CALIBRATION_EPISODES):
        seed = episode_seed(run_seed, scenario, f"calibrate:{opponent}", 0, episode)
        red = BuiltinTeamSystem(builtin("do_nothing", scenario))
        result = run_episode(config, {"red": red, "blue": blue}, seed)
        total += result.reported["blue"]
    sigma = total / CALIBRATION_EPISODES
    if cache_path is not None:
        cache[key] = sigma
        Path(cache_path).parent.mkdir(parents=True, exist_ok=True)
        Path(cache_path).write_text(json.dumps(cache, indent=2, sort_keys=True))
    return sigma


# -- run folder bookkeeping --------------------------------------------------


def _episode_row(
    scenario: str, red: str, blue: str, repeat: int, episode: int, result: EpisodeResult
) -> dict:
    return {
        "scenario": scenario,
        "red": red,
        "blue": blue,
        "repeat": repeat,
        "episode": episode,
        "seed": result.seed,
        "ticks": result.ticks,
        "scores": result.scores,
        "reported": result.reported,
        "winner": result.winner,
        "first_score_tick": result.first_score_tick,
        "wall_seconds": result.wall_seconds,
        "timelines": {t: list(map(list, tl)) for t, tl in result.timelines.items()},
        "chat": [[e.tick, e.sender, str(e.payload)] for e in result.chat_log],
        "disabled": result.disabled_teams,
    }


class RunFolder:
    """Owns one unique output directory and flushes artifacts per episode."""

    def __init__(self, base: str | Path, name: Optional[str] = None) -> None:
        stamp = name or time.strftime("run-%Y%m%d-%H%M%S")
        self.path = Path(base) / stamp
        suffix = 0
        while self.path.exists():
            suffix += 1
            self.path = Path(base) / f"{stamp}-{suffix}"
        (self.path / "episodes").mkdir(parents=True)

    def write_config(self, config: RunConfig) -> None:
        (self.path / "config.json").write_text(json.dumps(config.to_dict(), indent=2))

    def write_episode(self, row: dict) -> Path:
        name = f"{row['scenario']}_{row['blue']}_r{row['repeat']}_e{row['episode']}.json"
        target = self.path / "episodes" / name
        target.write_text(json.dumps(row, indent=2))
        return target

    def append_transcripts(self, rows: list[dict]) -> None:
        if not rows:
            return
        with open(self.path / "transcripts.jsonl", "a") as fh:
            for row in rows:
                fh.write(json.dumps(row) + "\n")

    def write_json(self, name: str, data) -> None:
        (self.path / name).write_text(json.dumps(data, indent=2, sort_keys=True))


def _drain_transcripts(system, context: dict) -> list[dict]:
    client = getattr(system, "client", None)
    calls = getattr(client, "calls", None)
    if not calls:
        return []
    rows = [
        {
            **context,
            "purpose": c.purpose,
            "t_resp": c.t_resp,
            "n_out": c.n_out,
            "request": c.request_text,
            "response": c.response_text,
        }
        for c in calls
    ]
    calls.clear()
    return rows


# -- the benchmark ----------------------------------------------------------


@dataclass
class BenchmarkOutput:
    run_dir: Path
    report: MetricsReport
    episodes: list[dict]
    failed_matchups: list[str]


def run_benchmark(config: RunConfig, folder_name: Optional[str] = None) -> BenchmarkOutput:
    folder = RunFolder(config.output_dir, folder_name)
    folder.write_config(config)
    report = MetricsReport()
    rows: list[dict] = []
    failed: list[str] = []
    calibration_path = folder.path / "calibration.json"
    for scenario in config.scenarios:
        scenario_config = get_scenario(scenario)
        for opponent in config.opponents_for(scenario):
            sigma = calibrate_sigma(scenario, opponent, config.seed, calibration_path)
            matchup = f"{scenario}/{config.red_system}-vs-{opponent}"
            results: list[EpisodeResult] = []
            try:
                for repeat in range(config.repeats):
                    red = make_system(
                        config.red_system, scenario, config.client.build, config.seed + repeat
                    )
                    blue = BuiltinTeamSystem(builtin(opponent, scenario))
                    for episode in range(config.episodes):
                        seed = episode_seed(config.seed, scenario, opponent, repeat, episode)
                        result = run_episode(scenario_config, {"red": red, "blue": blue}, seed)
                        results.append(result)
                        row = _episode_row(scenario, config.red_system, opponent, repeat, episode, result)
                        rows.append(row)
                        folder.write_episode(row)
                        folder.append_transcripts(
                            _drain_transcripts(red, {"scenario": scenario, "blue": opponent,
                                                     "repeat": repeat, "episode": episode})
                        )
            except Exception as exc:  # a broken matchup must not sink the run
                failed.append(f"{matchup}: {exc}")
                continue
            report.matchups.append(
                MatchupMetrics(scenario, config.red_system, opponent, compute_metrics(results, sigma))
            )
    from .export import export_all

    export_all(folder.path, rows, report)
    if failed:
        folder.write_json("failed_matchups.json", failed)
    return BenchmarkOutput(folder.path, report, rows, failed)


# -- protocols --------------------------------------------------------------


def adaptation_protocol(config: RunConfig, episodes_per_opponent: Optional[int] = None) -> dict:
    """Train vs each opponent, checkpoint, then evaluate the checkpoint for
    one episode against every opponent; aggregate Same vs Different cells."""
    train_n = episodes_per_opponent or config.episodes
    table: dict[str, dict[str, dict[str, float]]] = {}
    cells: dict[str, dict[str, list]] = {}
    for scenario in config.scenarios:
        scenario_config = get_scenario(scenario)
        opponents = config.opponents_for(scenario)
        sigmas = {o: calibrate_sigma(scenario, o, config.seed) for o in opponents}
        same: list = []
        different: list = []
        for repeat in range(config.repeats):
            for trained_on in opponents:
                red = make_system(config.red_system, scenario, config.client.build, config.seed)
                blue = BuiltinTeamSystem(builtin(trained_on, scenario))
                for episode in range(train_n):
                    seed = episode_seed(config.seed, scenario, f"adapt:{trained_on}", repeat, episode)
                    run_episode(scenario_config, {"red": red, "blue": blue}, seed)
                checkpoint = checkpoint_save(red) if isinstance(red, TactiCrafterSystem) else None
                for evaluated_on in opponents:
                    if checkpoint is not None:
                        evaluator = checkpoint_load(checkpoint, config.client.build())
                    else:
                        evaluator = red
                    seed = episode_seed(
                        config.seed, scenario, f"adapt-eval:{trained_on}:{evaluated_on}", repeat, 0
                    )
                    result = run_episode(
                        scenario_config,
                        {"red": evaluator, "blue": BuiltinTeamSystem(builtin(evaluated_on, scenario))},
                        seed,
                    )
                    values = metric_values(
                        [result.reported["red"]], [result.reported["blue"]], sigmas[evaluated_on]
                    )
                    (same if evaluated_on == trained_on else different).append(values)
        cells[scenario] = {"Same": same, "Different": different}
        table[scenario] = {
            kind: _mean_values(values) for kind, values in cells[scenario].items()
        }
    table["Avg"] = {
        kind: _mean_values([v for scenario in config.scenarios for v in cells[scenario][kind]])
        for kind in ("Same", "Different")
    }
    return table


def _mean_values(values: list) -> dict[str, float]:
    if not values:
        return {"P": 0.0, "S": 0.0, "D": 0.0, "W": 0.0}
    n = len(values)
    return {
        "P": sum(v.P for v in values) / n,
        "S": sum(v.S for v in values) / n,
        "D": sum(v.D for v in values) / n,
        "W": sum(v.W for v in values) / n,
    }


def self_play_protocol(
    config: RunConfig,
    total_episodes: int = 20,
    checkpoint_every: int = 5,
) -> dict:
    """Self-play with periodic checkpoints, each evaluated one episode
    against every built-in opponent."""
    out: dict[str, dict] = {}
    for scenario in config.scenarios:
        scenario_config = get_scenario(scenario)
        opponents = config.opponents_for(scenario)
        sigmas = {o: calibrate_sigma(scenario, o, config.seed) for o in opponents}
        red = make_system(config.red_system, scenario, config.client.build, config.seed)
        blue = make_system(config.red_system, scenario, config.client.build, config.seed + 1)
        scores = {"red": [], "blue": []}
        checkpoints: list[tuple[int, object]] = []
        for episode in range(total_episodes):
            seed = episode_seed(config.seed, scenario, "selfplay", 0, episode)
            result = run_episode(scenario_config, {"red": red, "blue": blue}, seed)
            scores["red"].append(result.reported["red"])
            scores["blue"].append(result.reported["blue"])
            if (episode + 1) % checkpoint_every == 0 and isinstance(red, TactiCrafterSystem):
                checkpoints.append((episode + 1, checkpoint_save(red)))
        evaluations = []
        for after, checkpoint in checkpoints:
            d_values = []
            for opponent in opponents:
                evaluator = checkpoint_load(checkpoint, config.client.build())
                seed = episode_seed(config.seed, scenario, f"selfplay-eval:{after}:{opponent}", 0, 0)
                result = run_episode(
                    scenario_config,
                    {"red": evaluator, "blue": BuiltinTeamSystem(builtin(opponent, scenario))},
                    seed,
                )
                values = metric_values(
                    [result.reported["red"]], [result.reported["blue"]], sigmas[opponent]
                )
                d_values.append({"opponent": opponent, **dataclasses.asdict(values)})
            evaluations.append({"after_episode": after, "results": d_values})
        out[scenario] = {"scores": scores, "evaluations": evaluations}
    return out
