"""Chain-of-thought baseline: one prompt per episode generates a program
for every agent on the team; no tactics, no causal model, no mid-episode
regeneration."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..actionlang import ActionProgram, ParseError, parse_source, pretty_print, validate
from ..systems import AgentView, ExecOutcome, Request, ScenarioMetadata, ScriptDriver
from ..world import Event
from .client import ChatClient, ChatCompletionRequest, ChatMessage, llm_call
from .tacticrafter import (
    OBJECTIVES,
    PROGRAM_CLOSE,
    PROGRAM_OPEN,
    WAIT_LOOP_SOURCE,
    PromptTemplates,
    TagParseError,
    extract_tagged,
    render_constants,
    render_events,
)


@dataclass
class _EpisodeMemory:
    programs: str = ""
    error: str = ""
    events: list[Event] = field(default_factory=list)


def cot_baseline(
    client: ChatClient,
    templates: PromptTemplates,
    prompt: str,
    agent_count: int,
    table,
    temperature: float = 0.3,
) -> list[Optional[ActionProgram]]:
    """One model call; returns a program per agent, None where parsing or
    validation failed (that agent falls back to a wait loop)."""
    request = ChatCompletionRequest(
        messages=[ChatMessage("user", prompt)], temperature=temperature, purpose="cot"
    )
    resp = llm_call(client, request)
    try:
        blocks = extract_tagged(resp.text, PROGRAM_OPEN, PROGRAM_CLOSE)
    except TagParseError:
        blocks = []
    programs: list[Optional[ActionProgram]] = []
    for i in range(agent_count):
        if i >= len(blocks):
            programs.append(None)
            continue
        try:
            program = parse_source(blocks[i])
        except ParseError:
            programs.append(None)
            continue
        programs.append(None if validate(program, table) else program)
    return programs


class CoTTeamSystem:
    """Single-prompt baseline team system; persists last-episode history."""

    def __init__(self, client: ChatClient, temperature: float = 0.3) -> None:
        self.client = client
        self.temperature = temperature
        self.templates = PromptTemplates()
        self.episode_counter = 0
        self._drivers: dict[str, ScriptDriver] = {}
        self._failed: set[str] = set()
        self._memory = _EpisodeMemory()
        self._team = ""
        self._meta: Optional[ScenarioMetadata] = None

    def pre_game(self, metadata: ScenarioMetadata, team_id: str, initial_obs) -> None:
        self._meta = metadata
        self._team = team_id
        self.episode_counter += 1
        agents = metadata.teams[team_id]
        surroundings = []
        for name in agents:
            obs = initial_obs.get(name)
            if obs is None:
                surroundings.append(f"{name}: (unknown)")
                continue
            kinds = sorted({k for k, _ in obs.nearby_blocks})
            mobs = sorted({k for k, _ in obs.nearby_mobs})
            surroundings.append(f"{name}: blocks={kinds} entities={mobs}")
        history = (
            "(first episode)"
            if not self._memory.programs
            else (
                f"Previous code:\n{self._memory.programs}\n"
                f"Execution error: {self._memory.error or '(none)'}\n"
                f"Chat log:\n{render_events(self._memory.events)}"
            )
        )
        prompt = self.templates.fill(
            "p_h",
            team_name=team_id,
            scenario=metadata.description,
            objective=OBJECTIVES.get(metadata.scenario, "outscore the opposing team"),
            agents=", ".join(agents),
            surroundings="\n".join(surroundings),
            primitives=metadata.primitive_docs,
            constants=render_constants(metadata.constants.get(team_id, {})),
            history=history,
        )
        programs = cot_baseline(
            self.client, self.templates, prompt, len(agents), metadata.primitive_table,
            self.temperature,
        )
        self._drivers = {}
        self._failed = set()
        texts = []
        for name, program in zip(agents, programs):
            driver = ScriptDriver()
            if program is None:
                driver.load_source(WAIT_LOOP_SOURCE)
                self._failed.add(name)
                texts.append(WAIT_LOOP_SOURCE)
            else:
                driver.load(program)
                texts.append(pretty_print(program))
            self._drivers[name] = driver
        self._memory = _EpisodeMemory(programs="\n\n".join(texts))

    def next_request(self, agent_name: str, view: AgentView) -> Optional[Request]:
        self._memory.events.extend(view.new_events)
        driver = self._drivers[agent_name]
        req = driver.next_request(view)
        if req is not None:
            return req
        # no regeneration mid-episode: an ended program leaves a wait loop
        if driver.status == "error" and not self._memory.error:
            self._memory.error = driver.error_message or ""
        driver.load_source(WAIT_LOOP_SOURCE)
        return driver.next_request(view)

    def on_result(self, agent_name: str, outcome: ExecOutcome) -> None:
        self._drivers[agent_name].report(outcome)

    def post_game(self, score) -> None:
        pass
