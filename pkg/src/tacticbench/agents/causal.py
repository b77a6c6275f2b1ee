"""Causal model: (action, causes, effects) relations keyed by the exact
action snippet text, growing monotonically by union.

The text serialization is one relation per line:

    Action: mineBlock("slime_block", 1); Cause: []; Effect ['slime_block']

The parser also accepts ``Effect: [...]`` with a colon.  Model responses may
instead carry relations as JSON objects; both forms normalize to the same
line format on output.
"""
from __future__ import annotations

import ast
import json
import re
from dataclasses import dataclass, field

_LINE = re.compile(r"^Action:\s*(?P<action>.*?);\s*Cause:\s*(?P<causes>\[.*?\]);\s*Effect:?\s*(?P<effects>\[.*?\])\s*$")


class CausalParseError(ValueError):
    pass


@dataclass(frozen=True)
class CausalRelation:
    action: str
    causes: tuple[str, ...] = ()
    effects: tuple[str, ...] = ()

    def to_line(self) -> str:
        return f"Action: {self.action}; Cause: {list(self.causes)!r}; Effect {list(self.effects)!r}"

    def merged_with(self, other: "CausalRelation") -> "CausalRelation":
        """Same-key merge: union of causes/effects, first-seen order."""
        causes = list(self.causes) + [c for c in other.causes if c not in self.causes]
        effects = list(self.effects) + [e for e in other.effects if e not in self.effects]
        return CausalRelation(self.action, tuple(causes), tuple(effects))


def _parse_items(text: str) -> tuple[str, ...]:
    try:
        value = ast.literal_eval(text)
    except (ValueError, SyntaxError) as exc:
        raise CausalParseError(f"malformed item list {text!r}") from exc
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise CausalParseError(f"item list must hold strings: {text!r}")
    return tuple(value)


def parse_relation_line(line: str) -> CausalRelation:
    m = _LINE.match(line.strip())
    if m is None:
        raise CausalParseError(f"not a causal relation line: {line!r}")
    return CausalRelation(
        action=m.group("action").strip(),
        causes=_parse_items(m.group("causes")),
        effects=_parse_items(m.group("effects")),
    )


@dataclass
class CausalGraph:
    """Insertion-ordered relation set; updates only ever add or widen."""

    relations: dict[str, CausalRelation] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.relations)

    def __contains__(self, action: str) -> bool:
        return action in self.relations

    def add(self, relation: CausalRelation) -> None:
        existing = self.relations.get(relation.action)
        if existing is None:
            self.relations[relation.action] = relation
        else:
            self.relations[relation.action] = existing.merged_with(relation)

    def union(self, other: "CausalGraph") -> "CausalGraph":
        out = CausalGraph(dict(self.relations))
        for rel in other.relations.values():
            out.add(rel)
        return out

    def covers(self, graph: "CausalGraph") -> bool:
        """True when every relation of ``graph`` is contained in this one."""
        for action, rel in graph.relations.items():
            mine = self.relations.get(action)
            if mine is None:
                return False
            if not set(rel.causes) <= set(mine.causes):
                return False
            if not set(rel.effects) <= set(mine.effects):
                return False
        return True

    def serialize(self) -> str:
        return "\n".join(rel.to_line() for rel in self.relations.values())

    @classmethod
    def parse(cls, text: str) -> "CausalGraph":
        graph = cls()
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            graph.add(parse_relation_line(line))
        return graph

    @classmethod
    def parse_lenient(cls, text: str) -> "CausalGraph":
        """Parse whatever relation lines or JSON objects a response contains.

        Non-matching lines are skipped; an empty result is a valid (empty)
        graph so callers can decide their own fallback.
        """
        graph = cls()
        stripped = text.strip()
        if stripped.startswith("[") or stripped.startswith("{"):
            try:
                graph._add_json(json.loads(stripped))
                return graph
            except (json.JSONDecodeError, CausalParseError):
                pass
        for line in text.splitlines():
            try:
                graph.add(parse_relation_line(line))
            except CausalParseError:
                continue
        return graph

    def _add_json(self, data) -> None:
        items = data if isinstance(data, list) else [data]
        for obj in items:
            if not isinstance(obj, dict) or "action" not in obj:
                raise CausalParseError(f"bad relation object {obj!r}")
            self.add(
                CausalRelation(
                    action=str(obj["action"]),
                    causes=tuple(obj.get("causes", obj.get("cause", []))),
                    effects=tuple(obj.get("effects", obj.get("effect", []))),
                )
            )

    def to_json(self) -> list[dict]:
        return [
            {"action": r.action, "causes": list(r.causes), "effects": list(r.effects)}
            for r in self.relations.values()
        ]

    @classmethod
    def from_json(cls, data: list[dict]) -> "CausalGraph":
        graph = cls()
        graph._add_json(data)
        return graph
