"""Model-driven pipeline: log dedup, causal graphs, tactics, clients,
checkpoints, and the baselines."""
from __future__ import annotations

from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tacticbench.agents import (
    CausalGraph,
    CausalParseError,
    CausalRelation,
    Checkpoint,
    ChatCompletionRequest,
    ChatMessage,
    CoTTeamSystem,
    FALLBACK_TACTICS_LINE,
    HttpChatClient,
    MAX_TACTICS_LINES,
    MockChatClient,
    OpponentTactics,
    PromptTemplates,
    TactiCrafterSystem,
    Tactics,
    TagParseError,
    TransportError,
    checkpoint_load,
    checkpoint_save,
    cot_baseline,
    dedup_events,
    default_mock_responder,
    ensure_primitive_coverage,
    extract_tagged,
    make_mock_client,
    opponent_chat_lines,
    parse_relation_line,
    render_events,
    select_longest_log,
    tactics_init,
)
from tacticbench.opponents import BuiltinTeamSystem, builtin
from tacticbench.runner import run_episode
from tacticbench.scenarios import get_scenario
from tacticbench.world import Event

FIXTURES = Path(__file__).parent / "fixtures"


def chat(sender: str, text: str, tick: int = 0) -> Event:
    return Event("chat", tick, sender, text)


def observe(sender: str, inventory: dict, tick: int = 0) -> Event:
    return Event("observe", tick, sender, {"inventory": inventory, "blocks": {}})


def keys(events: list[Event]) -> list[tuple]:
    return [e.key() for e in events]


# -- dedup ---------------------------------------------------------------------


def test_dedup_collapses_alternating_pair():
    events = [chat("A", m, tick=i) for i, m in enumerate(["a", "b"] * 3)]
    assert [e.payload for e in dedup_events(events)] == ["a", "b"]


def test_dedup_keeps_non_repeating_logs():
    events = [chat("A", m, tick=i) for i, m in enumerate(["a", "b", "c", "a", "c"])]
    assert keys(dedup_events(events)) == keys(events)


def test_dedup_ignores_observe_payload_drift():
    # a loop whose observes change every pass still collapses on the chats
    events = []
    for i in range(5):
        events.append(chat("A", "Mined 1 slime_block", tick=i * 10))
        events.append(observe("A", {"slime_block": i + 1}, tick=i * 10 + 1))
    out = dedup_events(events)
    assert sum(1 for e in out if e.kind == "chat") == 1


chat_logs = st.lists(
    st.sampled_from(["a", "b", "c", "d"]).map(lambda m: chat("A", m)),
    max_size=40,
)


@settings(max_examples=200, deadline=None)
@given(chat_logs)
def test_dedup_is_idempotent(events):
    once = dedup_events(events)
    assert keys(dedup_events(once)) == keys(once)


@settings(max_examples=200, deadline=None)
@given(chat_logs)
def test_dedup_output_is_a_subsequence(events):
    out = iter(keys(events))
    for k in keys(dedup_events(events)):
        assert k in out  # consumes the iterator: order-preserving subsequence


@settings(max_examples=200, deadline=None)
@given(chat_logs)
def test_dedup_never_grows_the_log(events):
    assert len(dedup_events(events)) <= len(events)


# -- causal graph ----------------------------------------------------------------


def test_relation_line_round_trips():
    rel = CausalRelation('mineBlock("slime_block", 1)', ("near slime",), ("slime_block",))
    assert parse_relation_line(rel.to_line()) == rel


def test_relation_line_accepts_effect_colon_variant():
    rel = parse_relation_line("Action: craft(); Cause: ['wood']; Effect: ['planks']")
    assert rel.effects == ("planks",)


def test_malformed_relation_lines_raise():
    for bad in ["", "Action: x", "Action: x; Cause: nope; Effect []",
                "Action: x; Cause: [1]; Effect []"]:
        with pytest.raises(CausalParseError):
            parse_relation_line(bad)


@pytest.mark.parametrize("name,expected", [("causal_small.txt", 23), ("causal_large.txt", 87)])
def test_fixture_graphs_parse_with_expected_sizes(name, expected):
    text = (FIXTURES / name).read_text()
    graph = CausalGraph.parse(text)
    assert len(graph) == expected
    again = CausalGraph.parse(graph.serialize())
    assert again.relations == graph.relations


def test_lenient_parse_skips_noise_and_reads_json():
    graph = CausalGraph.parse_lenient(
        "Here are the relations:\nAction: a(); Cause: []; Effect ['x']\nthanks!"
    )
    assert len(graph) == 1
    graph = CausalGraph.parse_lenient('[{"action": "b()", "effects": ["y"]}]')
    assert graph.relations["b()"].effects == ("y",)


relations = st.builds(
    CausalRelation,
    action=st.sampled_from(["a()", "b()", "c()", "d()"]),
    causes=st.lists(st.sampled_from(["p", "q", "r"]), max_size=3).map(tuple),
    effects=st.lists(st.sampled_from(["x", "y", "z"]), max_size=3).map(tuple),
)
def _build_graph(rels):
    g = CausalGraph()
    for r in rels:
        g.add(r)
    return g


graphs = st.lists(relations, max_size=8).map(_build_graph)


@settings(max_examples=200, deadline=None)
@given(graphs, graphs)
def test_union_is_monotone(a, b):
    u = a.union(b)
    assert u.covers(a) and u.covers(b)
    # union never loses what was already known
    assert a.union(b).union(b).covers(u)


def test_graph_json_round_trip():
    g = _build_graph([CausalRelation("a()", ("p",), ("x", "y"))])
    assert CausalGraph.from_json(g.to_json()).relations == g.relations


# -- tactics and tags --------------------------------------------------------------


def test_extract_tagged_finds_all_blocks():
    blocks = extract_tagged("x <p>one</p> y <p>two</p>", "<p>", "</p>")
    assert blocks == ["one", "two"]
    with pytest.raises(TagParseError):
        extract_tagged("nothing here", "<p>", "</p>")


def test_tactics_parse_and_truncate():
    t = Tactics.parse("<tactics>\nline one\nline two\n</tactics>")
    assert t.lines == ["line one", "line two"]
    over = Tactics([f"line {i}" for i in range(MAX_TACTICS_LINES + 3)])
    assert len(over.lines) == MAX_TACTICS_LINES
    with pytest.raises(TagParseError):
        Tactics.parse("<tactics>\n\n</tactics>")


def test_opponent_tactics_unknown_sentinel():
    assert OpponentTactics().to_text() == "unknown"
    assert OpponentTactics(["rushes berries"]).to_text() == "rushes berries"


def test_tactics_init_falls_back_after_bad_responses():
    client = MockChatClient(scripted_responses={"tactics": ["garbage", "more garbage"]})
    from tacticbench.agents.tacticrafter import GameDescription

    desc = GameDescription("red", "win", "a test scenario", ["Ryn"], "docs")
    t = tactics_init(client, PromptTemplates(), desc, CausalGraph())
    assert t.lines == [FALLBACK_TACTICS_LINE]
    assert len(client.calls) == 2  # one retry, then give up


def test_opponent_chat_lines_excludes_own_team():
    events = [chat("Ryn", "ours"), chat("Byte", "theirs"), chat("environment", "sys")]
    text = opponent_chat_lines(events, ["Byte", "Blink"])
    assert "theirs" in text and "ours" not in text and "sys" not in text


def test_select_longest_log_breaks_ties_low():
    a, b = [chat("A", "x")], [chat("B", "y")]
    assert select_longest_log([a, b]) is a
    assert select_longest_log([a, a + b]) == a + b


def test_render_events_handles_empty_and_caps():
    assert render_events([]) == "(nothing)"
    events = [chat("A", f"m{i}", tick=i) for i in range(300)]
    assert len(render_events(events, cap=10).splitlines()) == 10


# -- prompt templates ----------------------------------------------------------------


def test_all_templates_load_and_demand_their_slots():
    templates = PromptTemplates()
    assert set(templates.texts) == set(PromptTemplates.NAMES)
    with pytest.raises(KeyError):
        templates.fill("p_a", team_name="red")  # most slots missing


def test_fill_interpolates_values():
    templates = PromptTemplates()
    out = templates.fill(
        "p_c", team_name="red", scenario="test scenario", primitives="docs here"
    )
    assert "test scenario" in out and "docs here" in out


# -- clients ------------------------------------------------------------------------


def test_mock_client_records_latency_and_tokens():
    client = MockChatClient(responder=lambda p, t: "four words right here",
                            latency=2.0, token_count=100)
    resp = client.chat(ChatCompletionRequest([ChatMessage("user", "hi")], purpose="x"))
    assert resp.latency == 2.0 and resp.token_count == 100
    assert client.calls[0].t_resp == 2.0 and client.calls[0].n_out == 100
    assert client.calls[0].purpose == "x"


def test_mock_client_scripted_queue_per_purpose():
    client = MockChatClient(scripted_responses={"a": ["one", "two"]})
    req = ChatCompletionRequest([ChatMessage("user", "")], purpose="a")
    assert client.chat(req).text == "one"
    assert client.chat(req).text == "two"
    assert client.chat(req).text == ""


def _ok_body(text="hello", tokens=7):
    return {
        "choices": [{"message": {"content": text}}],
        "usage": {"completion_tokens": tokens},
    }


def test_http_client_sends_standard_payload():
    seen = {}

    def transport(url, payload, headers, timeout):
        seen.update(url=url, payload=payload, headers=headers)
        return _ok_body()

    client = HttpChatClient("http://example/v1/", "m1", api_key="k", transport=transport)
    resp = client.chat(ChatCompletionRequest([ChatMessage("user", "hi")], temperature=0.3))
    assert seen["url"] == "http://example/v1/chat/completions"
    assert seen["payload"]["model"] == "m1"
    assert seen["payload"]["messages"] == [{"role": "user", "content": "hi"}]
    assert seen["payload"]["temperature"] == 0.3
    assert seen["headers"]["Authorization"] == "Bearer k"
    assert resp.text == "hello" and resp.token_count == 7


def test_http_client_retries_then_succeeds():
    attempts = []
    naps = []

    def transport(url, payload, headers, timeout):
        attempts.append(1)
        if len(attempts) == 1:
            raise ConnectionError("boom")
        return _ok_body()

    client = HttpChatClient(
        "http://x", "m", api_key="", transport=transport, sleep=naps.append
    )
    resp = client.chat(ChatCompletionRequest([ChatMessage("user", "q")]))
    assert resp.text == "hello"
    assert len(attempts) == 2 and naps == [1.0]
    assert len(client.calls) == 1  # only the success is recorded


def test_http_client_gives_up_after_retries():
    attempts = []

    def transport(url, payload, headers, timeout):
        attempts.append(1)
        raise ConnectionError("down")

    client = HttpChatClient(
        "http://x", "m", api_key="", transport=transport, sleep=lambda s: None
    )
    with pytest.raises(TransportError):
        client.chat(ChatCompletionRequest([ChatMessage("user", "q")]))
    assert len(attempts) == 1 + HttpChatClient.MAX_RETRIES
    assert client.calls == []


# -- checkpoints ----------------------------------------------------------------------


def test_checkpoint_save_load_save_is_lossless():
    client = make_mock_client()
    system = TactiCrafterSystem(client)
    system.tactics = Tactics(["harvest fast", "guard the slime"])
    system.graph = _build_graph([CausalRelation("a()", ("p",), ("x",))])
    system.opponent_tactics = OpponentTactics(["they rush"])
    system.episode_counter = 4
    blob = checkpoint_save(system).to_json()
    restored = checkpoint_load(Checkpoint.from_json(blob), client)
    assert checkpoint_save(restored).to_json() == blob
    assert restored.tactics.lines == system.tactics.lines
    assert restored.graph.relations == system.graph.relations


def test_checkpoint_version_mismatch_rejected():
    blob = checkpoint_save(TactiCrafterSystem(make_mock_client())).to_json()
    tampered = blob.replace('"version": 1', '"version": 2')
    with pytest.raises(ValueError):
        Checkpoint.from_json(tampered)


# -- pipeline odds and ends -------------------------------------------------------------


def test_ensure_primitive_coverage_stubs_missing_actions():
    table = get_scenario("mushroom_war").primitive_table
    graph = ensure_primitive_coverage(CausalGraph(), table)
    heads = {a.split("(")[0] for a in graph.relations}
    assert heads == set(table.available)


def test_cot_baseline_pads_missing_programs_with_none():
    table = get_scenario("mushroom_war").primitive_table
    client = MockChatClient(
        responder=lambda p, t: '<program>\nmineBlock("slime_block", 1)\n</program>'
    )
    programs = cot_baseline(client, PromptTemplates(), "prompt", 2, table)
    assert programs[0] is not None and programs[1] is None


def test_cot_baseline_rejects_invalid_programs():
    table = get_scenario("mushroom_war").primitive_table
    client = MockChatClient(
        responder=lambda p, t: "<program>\ncraftItem(\"bread\", 1)\n</program>"
        "<program>\nbroken(\n</program>"
    )
    programs = cot_baseline(client, PromptTemplates(), "prompt", 2, table)
    assert programs == [None, None]


# -- full-system integration --------------------------------------------------------------


def _short_episode(system, scenario="mushroom_war", ticks=600, seed=2):
    config = get_scenario(scenario, duration_ticks=ticks)
    systems = {
        "red": system,
        "blue": BuiltinTeamSystem(builtin("do_nothing", scenario)),
    }
    return run_episode(config, systems, seed)


def test_tacticrafter_scores_with_the_mock_client():
    client = make_mock_client()
    system = TactiCrafterSystem(client)
    result = _short_episode(system, ticks=1200)
    assert result.scores["red"] > 0
    assert result.disabled_teams == []
    purposes = {c.purpose for c in client.calls}
    assert {"causal", "tactics", "program"} <= purposes


def test_tacticrafter_charges_idle_for_midgame_regenerations():
    client = make_mock_client(latency=0.5)  # 10 ticks per regeneration
    system = TactiCrafterSystem(client)
    _short_episode(system, ticks=1200)
    assert system.idle_ticks_charged > 0
    assert system.idle_ticks_charged % 10 == 0
    assert any(n > 1 for n in system.iteration_counts.values())


def test_tacticrafter_benches_agents_after_repeated_parse_failures():
    client = MockChatClient(responder=lambda p, t: "no tags at all")
    system = TactiCrafterSystem(client)
    result = _short_episode(system, ticks=200)
    assert all(a.benched for a in system._agents.values())
    assert result.scores["red"] == 0  # wait-loop team cannot score


def test_tacticrafter_second_episode_runs_the_update_path():
    client = make_mock_client()
    system = TactiCrafterSystem(client)
    _short_episode(system, ticks=600, seed=2)
    n_before = len(client.calls)
    _short_episode(system, ticks=600, seed=3)
    purposes = [c.purpose for c in client.calls[n_before:]]
    assert "opponent" in purposes and "causal" in purposes and "tactics" in purposes
    assert system.episode_counter == 2


def test_cot_system_plays_and_scores():
    client = make_mock_client()
    system = CoTTeamSystem(client)
    result = _short_episode(system, ticks=1200)
    assert result.scores["red"] > 0
    assert [c.purpose for c in client.calls] == ["cot"]


def test_mock_responder_adapts_to_scenario_keywords():
    mw = default_mock_responder("program", "agent index: 0\nmine the slime_block patches")
    assert "slime_block" in mw
    dd = default_mock_responder("program", "agent index: 0\nOWN_SERVER = Red_Server\nserve and cook")
    assert "Red_Server" in dd
