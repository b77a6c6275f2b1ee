"""Event-log compaction: collapse consecutive tandem repeats.

Logs produced by looping programs contain the same chat sequence over and
over.  ``dedup_events`` finds consecutive repeats of chat subsequences
(greedy, longest repeat first, window up to 64 messages) and keeps only the
first occurrence.  Observe events ride along with the chat that precedes
them, so observes attached to a removed chat are dropped too.  Relative
order of retained events is always preserved and the result is a
subsequence of the input.
"""
from __future__ import annotations

from ..world import Event

MAX_WINDOW = 64


def _units(events: list[Event]) -> list[tuple[tuple, list[Event]]]:
    """Group the log into (key, events) units.

    A unit is one chat event plus the observe events that follow it; leading
    non-chat events each form their own unit.  The unit key ignores ticks and
    attached observes, so two iterations of the same loop compare equal.
    """
    units: list[tuple[tuple, list[Event]]] = []
    for ev in events:
        if ev.kind == "chat" or not units:
            units.append((ev.key(), [ev]))
        elif units[-1][1][0].kind == "chat":
            units[-1][1].append(ev)
        else:
            units.append((ev.key(), [ev]))
    return units


def _collapse_pass(units: list[tuple[tuple, list[Event]]]):
    keys = [k for k, _ in units]
    n = len(keys)
    out: list[tuple[tuple, list[Event]]] = []
    i = 0
    changed = False
    while i < n:
        hit = 0
        for length in range(min(MAX_WINDOW, (n - i) // 2), 0, -1):
            if keys[i : i + length] == keys[i + length : i + 2 * length]:
                hit = length
                break
        if hit:
            j = i + hit
            while j + hit <= n and keys[j : j + hit] == keys[i : i + hit]:
                j += hit
            out.extend(units[i : i + hit])
            i = j
            changed = True
        else:
            out.append(units[i])
            i += 1
    return out, changed


def dedup_events(events: list[Event]) -> list[Event]:
    """Deduplicated copy of ``events``; the input list is not modified."""
    units = _units(list(events))
    while True:
        units, changed = _collapse_pass(units)
        if not changed:
            break
    return [ev for _, unit in units for ev in unit]
