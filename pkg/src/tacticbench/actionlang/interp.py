"""Stepwise ActScript interpreter.

``step`` yields exactly the next primitive/wait/say request and otherwise
advances control flow.  ``loop { }`` bodies that complete a full pass
without producing a request yield an implicit 1-tick wait so interpretation
always makes forward progress.  A primitive failure reported through
``report_error`` aborts the program with the environment feedback string.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .parse import ActionProgram, Call, IfHas, Loop, Repeat, Say, Statement, Wait

_ITEM_ID = re.compile(r"^[a-z_][a-z0-9_]*$")


@dataclass
class PrimitiveRequest:
    name: str
    args: list
    call: Call


@dataclass
class WaitRequest:
    ticks: int


@dataclass
class SayRequest:
    text: str


Request = Union[PrimitiveRequest, WaitRequest, SayRequest]


@dataclass
class _Frame:
    body: list[Statement]
    idx: int = 0
    kind: str = "block"  # block | loop | repeat
    remaining: int = 0  # repeat iterations left (current one included)
    produced: bool = False  # did this loop pass produce a request?


@dataclass
class ExecState:
    program: ActionProgram
    frames: list[_Frame] = field(default_factory=list)
    status: str = "running"  # running | done | error
    error_message: Optional[str] = None

    def __post_init__(self) -> None:
        self.frames = [_Frame(self.program.statements)]

    def report_error(self, message: str) -> None:
        self.status = "error"
        self.error_message = message

    def mark_done(self) -> None:
        self.status = "done"


def step(exec_state: ExecState, world, agent) -> Optional[Request]:
    """Advance to the next request; None when the program is done/errored.

    ``world`` supplies the episode clock (``tick`` / ``duration``), ``agent``
    supplies the inventory consulted by ``if has(...)``.
    """
    if exec_state.status != "running":
        return None
    if world is not None and world.tick >= getattr(world, "duration", float("inf")):
        exec_state.mark_done()
        return None
    frames = exec_state.frames
    while True:
        if not frames:
            exec_state.mark_done()
            return None
        frame = frames[-1]
        if frame.idx >= len(frame.body):
            if frame.kind == "loop":
                if world is not None and world.tick >= world.duration:
                    exec_state.mark_done()
                    return None
                if not frame.produced:
                    # empty or request-free pass: burn a tick instead of spinning
                    frame.idx = 0
                    return WaitRequest(1)
                frame.produced = False
                frame.idx = 0
                continue
            if frame.kind == "repeat":
                frame.remaining -= 1
                if frame.remaining > 0:
                    frame.idx = 0
                    continue
            frames.pop()
            continue
        stmt = frame.body[frame.idx]
        frame.idx += 1
        if isinstance(stmt, Call):
            _mark_produced(frames)
            return PrimitiveRequest(stmt.name, list(stmt.args), stmt)
        if isinstance(stmt, Wait):
            _mark_produced(frames)
            return WaitRequest(stmt.ticks)
        if isinstance(stmt, Say):
            _mark_produced(frames)
            return SayRequest(stmt.text)
        if isinstance(stmt, Repeat):
            if stmt.count > 0 and stmt.body:
                frames.append(_Frame(stmt.body, kind="repeat", remaining=stmt.count))
            continue
        if isinstance(stmt, Loop):
            frames.append(_Frame(stmt.body, kind="loop"))
            continue
        if isinstance(stmt, IfHas):
            if not _ITEM_ID.match(stmt.item):
                exec_state.report_error(f"has() called with malformed item id {stmt.item!r}")
                return None
            branch = stmt.then if agent.inventory.count(stmt.item) >= stmt.count else stmt.otherwise
            if branch:
                frames.append(_Frame(branch))
            continue
        exec_state.report_error(f"unknown statement {stmt!r}")
        return None


def _mark_produced(frames: list[_Frame]) -> None:
    for f in frames:
        if f.kind == "loop":
            f.produced = True
