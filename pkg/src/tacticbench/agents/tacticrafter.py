"""The tactics/causal/opponent-model agent pipeline and its team system.

Flow per matchup: on the first episode the system asks the model for an
initial team plan and an initial causal model; before every later episode
it updates the causal model from last episode's logs, re-reads the opponent
from their chat, and revises the plan.  During an episode each base agent
runs generated programs in a generate-execute-critique loop; the first
program of an episode is generated pre-game and carries no in-game latency
cost, later generations charge idle ticks at 20 ticks per second of
response time.
"""
from __future__ import annotations

import json
import logging
import re
import string
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

from ..actionlang import ActionProgram, ParseError, parse_source, pretty_print, validate
from ..systems import AgentView, ExecOutcome, Request, ScenarioMetadata, ScriptDriver
from ..world import TICKS_PER_SECOND, Event
from .causal import CausalGraph, CausalRelation
from .client import ChatClient, ChatCompletionRequest, ChatMessage, llm_call
from .dedup import dedup_events

log = logging.getLogger(__name__)

TACTICS_OPEN, TACTICS_CLOSE = "<tactics>", "</tactics>"
PROGRAM_OPEN, PROGRAM_CLOSE = "<program>", "</program>"
MAX_TACTICS_LINES = 6
UNKNOWN = "unknown"
FALLBACK_TACTICS_LINE = "All players harvest in own area"
WAIT_LOOP_SOURCE = "loop { wait(20) }"
MAX_PARSE_FAILURES = 3
CHECKPOINT_VERSION = 1
HISTORY_EVENT_CAP = 200

OBJECTIVES = {
    "mushroom_war": "harvest mushrooms in your own area to score more points than the opposing team",
    "dash_and_dine": "cook and deliver high-value food to your own server to outscore the opposing team",
}


class TagParseError(ValueError):
    pass


def extract_tagged(text: str, open_tag: str, close_tag: str) -> list[str]:
    pattern = re.compile(re.escape(open_tag) + r"(.*?)" + re.escape(close_tag), re.DOTALL)
    blocks = [m.group(1).strip() for m in pattern.finditer(text)]
    if not blocks:
        raise TagParseError(f"no {open_tag}...{close_tag} block in response")
    return blocks


# -- artifacts ---------------------------------------------------------------


@dataclass
class Tactics:
    lines: list[str]

    def __post_init__(self) -> None:
        if not self.lines:
            raise ValueError("tactics cannot be empty")
        if len(self.lines) > MAX_TACTICS_LINES:
            log.warning("tactics over %d lines, truncating", MAX_TACTICS_LINES)
            self.lines = self.lines[:MAX_TACTICS_LINES]

    @classmethod
    def parse(cls, text: str) -> "Tactics":
        block = extract_tagged(text, TACTICS_OPEN, TACTICS_CLOSE)[0]
        lines = [ln.strip() for ln in block.splitlines() if ln.strip()]
        if not lines:
            raise TagParseError("empty tactics block")
        return cls(lines)

    def to_text(self) -> str:
        return "\n".join(self.lines)


@dataclass
class OpponentTactics:
    lines: list[str] = field(default_factory=list)

    @property
    def is_unknown(self) -> bool:
        return not self.lines

    def to_text(self) -> str:
        return UNKNOWN if self.is_unknown else "\n".join(self.lines)


@dataclass
class Critique:
    text: str

    def to_text(self) -> str:
        return self.text


@dataclass
class GameDescription:
    team_name: str
    objective: str
    scenario_description: str
    agents: list[str]
    primitive_docs: str
    opponent_name: str = ""
    constants: dict[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.scenario_description:
            raise ValueError("scenario description must be non-empty")


@dataclass
class History:
    events: list[Event] = field(default_factory=list)
    previous_tactics: Optional[Tactics] = None
    previous_opponent_tactics: Optional[OpponentTactics] = None
    previous_program: str = ""
    previous_error: str = ""


# -- prompt templates --------------------------------------------------------


class PromptTemplates:
    """The p_a..p_h prompt assets; every named slot must be filled."""

    NAMES = ("p_a", "p_b", "p_c", "p_d", "p_e", "p_f", "p_g", "p_h")

    def __init__(self) -> None:
        base = resources.files("tacticbench") / "agents" / "templates"
        self.texts = {name: (base / f"{name}.txt").read_text() for name in self.NAMES}

    def fill(self, name: str, **slots) -> str:
        template = string.Template(self.texts[name])
        needed = {
            m.group("named") or m.group("braced")
            for m in template.pattern.finditer(template.template)
            if m.group("named") or m.group("braced")
        }
        missing = needed - set(slots)
        if missing:
            raise KeyError(f"template {name} missing slots: {sorted(missing)}")
        return template.substitute({k: str(v) for k, v in slots.items()})


# -- history rendering -------------------------------------------------------


def render_events(events: list[Event], cap: int = HISTORY_EVENT_CAP) -> str:
    compact = dedup_events(events)[-cap:]
    lines = []
    for ev in compact:
        if ev.kind == "chat":
            lines.append(f"[{ev.tick}] {ev.sender}: {ev.payload}")
        else:
            p = ev.payload if isinstance(ev.payload, dict) else {}
            lines.append(
                f"[{ev.tick}] {ev.sender} observes blocks={p.get('blocks', {})} "
                f"inventory={p.get('inventory', {})}"
            )
    return "\n".join(lines) if lines else "(nothing)"


def render_member_history(events: list[Event], members: list[str]) -> str:
    """Per member: (chat message, inventory at that time) pairs."""
    out = []
    for member in members:
        inventory: dict = {}
        pairs = []
        for ev in dedup_events(events):
            if ev.kind == "observe" and ev.sender == member and isinstance(ev.payload, dict):
                inventory = ev.payload.get("inventory", {})
            elif ev.kind == "chat" and ev.sender == member:
                pairs.append(f'  ("{ev.payload}", inventory={inventory})')
        out.append(f"{member}:")
        out.extend(pairs if pairs else ["  (no messages)"])
    return "\n".join(out)


def opponent_chat_lines(events: list[Event], opponent_members: list[str]) -> str:
    lines = [
        f"[{ev.tick}] {ev.sender}: {ev.payload}"
        for ev in dedup_events(events)
        if ev.kind == "chat" and ev.sender in opponent_members
    ]
    return "\n".join(lines) if lines else "(no opponent messages)"


def render_constants(constants: dict[str, object]) -> str:
    if not constants:
        return "(none)"
    return "\n".join(f"{k} = {v}" for k, v in sorted(constants.items()))


# -- pipeline operations -----------------------------------------------------


def _chat(client: ChatClient, purpose: str, prompt: str, temperature: float):
    request = ChatCompletionRequest(
        messages=[ChatMessage("user", prompt)], temperature=temperature, purpose=purpose
    )
    return llm_call(client, request)


def tactics_init(
    client: ChatClient,
    templates: PromptTemplates,
    desc: GameDescription,
    graph: CausalGraph,
    temperature: float = 0.3,
) -> Tactics:
    prompt = templates.fill(
        "p_a",
        team_name=desc.team_name,
        scenario=desc.scenario_description,
        objective=desc.objective,
        agents=", ".join(desc.agents),
        primitives=desc.primitive_docs,
        causal_graph=graph.serialize() or "(empty)",
    )
    for _ in range(2):
        resp = _chat(client, "tactics", prompt, temperature)
        try:
            return Tactics.parse(resp.text)
        except TagParseError:
            continue
    return Tactics([FALLBACK_TACTICS_LINE])


def tactics_update(
    client: ChatClient,
    templates: PromptTemplates,
    desc: GameDescription,
    history: History,
    graph: CausalGraph,
    opponent: OpponentTactics,
    temperature: float = 0.3,
) -> Tactics:
    previous = history.previous_tactics or Tactics([FALLBACK_TACTICS_LINE])
    prompt = templates.fill(
        "p_b",
        team_name=desc.team_name,
        scenario=desc.scenario_description,
        objective=desc.objective,
        agents=", ".join(desc.agents),
        primitives=desc.primitive_docs,
        history=render_events(history.events),
        causal_graph=graph.serialize() or "(empty)",
        previous_tactics=previous.to_text(),
        opponent_tactics=opponent.to_text(),
    )
    for _ in range(2):
        resp = _chat(client, "tactics", prompt, temperature)
        try:
            return Tactics.parse(resp.text)
        except TagParseError:
            continue
    return previous


def _stub_call(name: str, table) -> str:
    spec = table.spec(name)
    args = []
    for kind in spec.arg_kinds[: spec.min_args]:
        args.append('"item"' if kind == "str" else "1")
    return f"{name}({', '.join(args)})"


def ensure_primitive_coverage(graph: CausalGraph, table) -> CausalGraph:
    """Every available primitive gets at least one relation; missing ones
    are stubbed with empty causes/effects."""
    covered = set()
    for action in graph.relations:
        head = action.split("(", 1)[0].strip()
        covered.add(head)
    for name in sorted(table.available):
        if name not in covered:
            graph.add(CausalRelation(_stub_call(name, table)))
    return graph


def causal_init(
    client: ChatClient,
    templates: PromptTemplates,
    desc: GameDescription,
    table,
    temperature: float = 0.3,
) -> CausalGraph:
    prompt = templates.fill(
        "p_c",
        team_name=desc.team_name,
        scenario=desc.scenario_description,
        primitives=desc.primitive_docs,
    )
    graph = CausalGraph()
    for _ in range(2):
        resp = _chat(client, "causal", prompt, temperature)
        graph = CausalGraph.parse_lenient(resp.text)
        if len(graph):
            break
    return ensure_primitive_coverage(graph, table)


def causal_update(
    client: ChatClient,
    templates: PromptTemplates,
    desc: GameDescription,
    history: History,
    graph: CausalGraph,
    temperature: float = 0.3,
) -> CausalGraph:
    prompt = templates.fill(
        "p_d",
        team_name=desc.team_name,
        causal_graph=graph.serialize() or "(empty)",
        history=render_member_history(history.events, desc.agents),
    )
    for _ in range(2):
        resp = _chat(client, "causal", prompt, temperature)
        new = CausalGraph.parse_lenient(resp.text)
        if len(new):
            return graph.union(new)
    return graph


def opponent_update(
    client: ChatClient,
    templates: PromptTemplates,
    desc: GameDescription,
    history: History,
    opponent_members: list[str],
    previous: OpponentTactics,
    temperature: float = 0.3,
) -> OpponentTactics:
    chat_lines = opponent_chat_lines(history.events, opponent_members)
    prompt = templates.fill(
        "p_e",
        opponent_name=desc.opponent_name,
        scenario=desc.scenario_description,
        objective=desc.objective,
        opponent_chat=chat_lines,
        previous_opponent_tactics=previous.to_text(),
    )
    resp = _chat(client, "opponent", prompt, temperature)
    text = resp.text.strip()
    if not text or text.lower() == UNKNOWN:
        return previous if not previous.is_unknown else OpponentTactics()
    try:
        return OpponentTactics(Tactics.parse(text).lines)
    except TagParseError:
        return previous


def select_longest_log(agent_logs: list[list[Event]]) -> list[Event]:
    """The most complete log; ties go to the lowest agent index."""
    if not agent_logs:
        raise ValueError("need at least one log")
    best = agent_logs[0]
    for candidate in agent_logs[1:]:
        if len(candidate) > len(best):
            best = candidate
    return best


# -- checkpoints -------------------------------------------------------------


@dataclass
class Checkpoint:
    version: int
    episode_counter: int
    tactics: Optional[list[str]]
    causal_graph: list[dict]
    opponent_tactics: list[str]

    def to_json(self) -> str:
        return json.dumps(
            {
                "version": self.version,
                "episode_counter": self.episode_counter,
                "tactics": self.tactics,
                "causal_graph": self.causal_graph,
                "opponent_tactics": self.opponent_tactics,
            },
            indent=2,
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "Checkpoint":
        data = json.loads(text)
        if data.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"checkpoint version mismatch: {data.get('version')!r}")
        return cls(
            version=data["version"],
            episode_counter=data["episode_counter"],
            tactics=data["tactics"],
            causal_graph=data["causal_graph"],
            opponent_tactics=data["opponent_tactics"],
        )


def checkpoint_save(system: "TactiCrafterSystem") -> Checkpoint:
    return Checkpoint(
        version=CHECKPOINT_VERSION,
        episode_counter=system.episode_counter,
        tactics=system.tactics.lines if system.tactics else None,
        causal_graph=system.graph.to_json(),
        opponent_tactics=system.opponent_tactics.lines,
    )


def checkpoint_load(checkpoint: Checkpoint, client: ChatClient, **kwargs) -> "TactiCrafterSystem":
    if checkpoint.version != CHECKPOINT_VERSION:
        raise ValueError(f"checkpoint version mismatch: {checkpoint.version!r}")
    system = TactiCrafterSystem(client, **kwargs)
    system.episode_counter = checkpoint.episode_counter
    system.tactics = Tactics(list(checkpoint.tactics)) if checkpoint.tactics else None
    system.graph = CausalGraph.from_json(checkpoint.causal_graph)
    system.opponent_tactics = OpponentTactics(list(checkpoint.opponent_tactics))
    return system


# -- the team system ---------------------------------------------------------


class _BaseAgent:
    """One base agent: program driver plus roll-out iteration bookkeeping."""

    def __init__(self, name: str, index: int) -> None:
        self.name = name
        self.index = index
        self.driver = ScriptDriver()
        self.iterations = 0
        self.parse_failures = 0
        self.benched = False
        self.critique = Critique("")
        self.program_text = ""
        self.events: list[Event] = []
        self.last_error = ""


class TactiCrafterSystem:
    """Persistent team system wrapping the full agent pipeline."""

    def __init__(self, client: ChatClient, temperature: float = 0.3) -> None:
        self.client = client
        self.temperature = temperature
        self.templates = PromptTemplates()
        self.episode_counter = 0
        self.tactics: Optional[Tactics] = None
        self.graph = CausalGraph()
        self.opponent_tactics = OpponentTactics()
        self._agents: dict[str, _BaseAgent] = {}
        self._desc: Optional[GameDescription] = None
        self._meta: Optional[ScenarioMetadata] = None
        self._team = ""
        self._last_history = History()
        self.idle_ticks_charged = 0
        self.iteration_counts: dict[str, int] = {}

    # -- episode lifecycle --------------------------------------------

    def pre_game(self, metadata: ScenarioMetadata, team_id: str, initial_obs) -> None:
        self._meta = metadata
        self._team = team_id
        opponent = metadata.opponent_of(team_id)
        self._desc = GameDescription(
            team_name=team_id,
            objective=OBJECTIVES.get(metadata.scenario, "outscore the opposing team"),
            scenario_description=metadata.description,
            agents=list(metadata.teams[team_id]),
            primitive_docs=metadata.primitive_docs,
            opponent_name=opponent,
            constants=dict(metadata.constants.get(team_id, {})),
        )
        self.episode_counter += 1
        if self.episode_counter == 1 and self.tactics is None:
            self.graph = causal_init(
                self.client, self.templates, self._desc, metadata.primitive_table, self.temperature
            )
            self.tactics = tactics_init(
                self.client, self.templates, self._desc, self.graph, self.temperature
            )
        elif self._last_history.events:
            history = self._last_history
            self.graph = causal_update(
                self.client, self.templates, self._desc, history, self.graph, self.temperature
            )
            self.opponent_tactics = opponent_update(
                self.client,
                self.templates,
                self._desc,
                history,
                list(self._meta.teams[opponent]),
                self.opponent_tactics,
                self.temperature,
            )
            self.tactics = tactics_update(
                self.client,
                self.templates,
                self._desc,
                history,
                self.graph,
                self.opponent_tactics,
                self.temperature,
            )
        self._agents = {
            name: _BaseAgent(name, i) for i, name in enumerate(metadata.teams[team_id])
        }
        # first roll-out iteration happens pre-game: no latency cost in-sim
        for agent in self._agents.values():
            self._generate_program(agent, charge_latency=False)

    def _program_prompt(self, agent: _BaseAgent) -> str:
        return self.templates.fill(
            "p_f",
            agent_name=agent.name,
            agent_index=agent.index,
            team_name=self._desc.team_name,
            scenario=self._desc.scenario_description,
            tactics=self.tactics.to_text() if self.tactics else FALLBACK_TACTICS_LINE,
            causal_graph=self.graph.serialize() or "(empty)",
            primitives=self._desc.primitive_docs,
            constants=render_constants(self._desc.constants),
            history=render_events(agent.events) if agent.events else "(episode start)",
            critique=agent.critique.to_text() or "(none)",
        )

    def _generate_program(self, agent: _BaseAgent, charge_latency: bool) -> None:
        if agent.benched:
            return
        prompt = self._program_prompt(agent)
        latency = 0.0
        program: Optional[ActionProgram] = None
        for _ in range(2):
            resp = _chat(self.client, "program", prompt, self.temperature)
            latency = resp.latency
            try:
                source = extract_tagged(resp.text, PROGRAM_OPEN, PROGRAM_CLOSE)[0]
                candidate = parse_source(source)
            except (TagParseError, ParseError):
                agent.parse_failures += 1
                if agent.parse_failures >= MAX_PARSE_FAILURES:
                    break
                continue
            issues = validate(candidate, self._meta.primitive_table)
            if issues:
                agent.parse_failures += 1
                if agent.parse_failures >= MAX_PARSE_FAILURES:
                    break
                continue
            program = candidate
            agent.parse_failures = 0
            break
        if program is None:
            if agent.parse_failures >= MAX_PARSE_FAILURES:
                agent.benched = True
                source = WAIT_LOOP_SOURCE
            else:
                # finite pause, so the failure count can keep accumulating
                # across retries until the bench threshold is reached
                source = "wait(100)"
            program = parse_source(source)
            agent.program_text = source
        else:
            agent.program_text = pretty_print(program)
        agent.driver.load(program)
        agent.iterations += 1
        if charge_latency:
            idle = round(latency * TICKS_PER_SECOND)
            agent.driver.charge_idle(idle)
            self.idle_ticks_charged += idle

    def _criticize(self, agent: _BaseAgent, view: AgentView) -> None:
        obs = view.observation
        status = {
            "chat log": [f"{e.sender}: {e.payload}" for e in dedup_events(agent.events)[-20:] if e.kind == "chat"],
            "biome": obs.self_status.get("biome"),
            "time": obs.self_status.get("time"),
            "nearby blocks": sorted({k for k, _ in obs.nearby_blocks}),
            "nearby entities": sorted({k for k, _ in obs.nearby_mobs}),
            "health": obs.self_status.get("health"),
            "hunger": obs.self_status.get("hunger"),
            "position": obs.self_status.get("position"),
            "inventory": obs.inventory.as_dict(),
        }
        prompt = self.templates.fill(
            "p_g",
            agent_name=agent.name,
            team_name=self._desc.team_name,
            tactics=self.tactics.to_text() if self.tactics else FALLBACK_TACTICS_LINE,
            status_report="\n".join(f"{k}: {v}" for k, v in status.items()),
            error=agent.last_error or "(completed without error)",
        )
        resp = _chat(self.client, "critic", prompt, self.temperature)
        agent.critique = Critique(resp.text.strip())

    # -- game phase ---------------------------------------------------

    def next_request(self, agent_name: str, view: AgentView) -> Optional[Request]:
        agent = self._agents[agent_name]
        agent.events.extend(view.new_events)
        req = agent.driver.next_request(view)
        if req is not None:
            return req
        if agent.benched or view.tick >= view.duration:
            return None
        # program ended (error or clean completion): critique and regenerate
        agent.last_error = agent.driver.error_message or ""
        self._criticize(agent, view)
        self._generate_program(agent, charge_latency=True)
        return agent.driver.next_request(view)

    def on_result(self, agent_name: str, outcome: ExecOutcome) -> None:
        self._agents[agent_name].driver.report(outcome)

    def post_game(self, score) -> None:
        logs = [self._agents[n].events for n in self._meta.teams[self._team]]
        self.iteration_counts = {n: self._agents[n].iterations for n in self._agents}
        self._last_history = History(
            events=select_longest_log(logs),
            previous_tactics=self.tactics,
            previous_opponent_tactics=self.opponent_tactics,
            previous_program="\n\n".join(a.program_text for a in self._agents.values()),
            previous_error="; ".join(
                a.last_error for a in self._agents.values() if a.last_error
            ),
        )
