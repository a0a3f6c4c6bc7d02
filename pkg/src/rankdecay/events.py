"""Interaction events and the JSON Lines event-log format.

One event per line::

    {"ts": 1700000000000, "kind": "rec_click", "anchor": "A", "item": "B"}

Blank lines and lines starting with ``#`` are ignored.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import InvalidEventError, LogFormatError


class EventKind(str, enum.Enum):
    REC_CLICK = "rec_click"
    CHECKOUT = "checkout"
    ADD_TO_CART = "add_to_cart"


@dataclass(frozen=True)
class Event:
    """A timestamped interaction on an anchor's page.

    ``ts`` is in integer milliseconds since the epoch (UTC).  Construction
    does not validate semantics, so a dirty log can still be represented;
    call :meth:`validate` (replay does) to reject malformed events.
    """

    ts: int
    kind: EventKind
    anchor: str
    item: str

    def validate(self):
        if isinstance(self.ts, bool) or not isinstance(self.ts, int) or self.ts <= 0:
            raise InvalidEventError(f"timestamp must be a positive integer, got {self.ts!r}")
        if not isinstance(self.anchor, str) or not self.anchor:
            raise InvalidEventError("anchor id must be a non-empty string")
        if not isinstance(self.item, str) or not self.item:
            raise InvalidEventError("item id must be a non-empty string")
        if not isinstance(self.kind, EventKind):
            raise InvalidEventError(f"unknown event kind {self.kind!r}")
        return self

    def to_json(self):
        return json.dumps(
            {"ts": self.ts, "kind": self.kind.value, "anchor": self.anchor, "item": self.item},
            ensure_ascii=False,
        )

    @classmethod
    def from_mapping(cls, row):
        try:
            ts, kind, anchor, item = row["ts"], row["kind"], row["anchor"], row["item"]
        except (KeyError, TypeError) as exc:
            raise LogFormatError(f"event record missing field: {exc}") from None
        try:
            kind = EventKind(kind)
        except ValueError:
            raise LogFormatError(f"unknown event kind {kind!r}") from None
        return cls(ts, kind, anchor, item)


def parse_events(lines):
    """Parse JSON Lines text into events.

    Raises :class:`LogFormatError` with the 1-based line number on syntax
    errors, missing fields or unknown kinds.  Semantically invalid events
    (empty ids, non-positive timestamps) are returned as-is for replay to
    reject and count.
    """
    events = []
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            row = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise LogFormatError(f"line {lineno}: invalid JSON ({exc.msg})") from None
        if not isinstance(row, dict):
            raise LogFormatError(f"line {lineno}: expected a JSON object")
        try:
            events.append(Event.from_mapping(row))
        except LogFormatError as exc:
            raise LogFormatError(f"line {lineno}: {exc}") from None
    return events


def read_log(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_events(fh)
    except UnicodeDecodeError as exc:
        raise LogFormatError(f"{path}: not valid UTF-8 ({exc.reason})") from None


def write_log(events, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for ev in events:
            fh.write(ev.to_json())
            fh.write("\n")


def generate_log(
    n_items=50,
    n_anchors=20,
    n_events=1000,
    seed=0,
    start_ts=1_700_000_000_000,
    mean_gap_ms=60_000,
    checkout_rate=0.03,
    cart_rate=0.07,
):
    """Synthetic event log with uniformly drawn ids and increasing timestamps.

    Deterministic for a given ``seed`` (numpy PCG64).
    """
    if n_events <= 0:
        raise ValueError("n_events must be positive")
    if n_items <= 0 or n_anchors <= 0:
        raise ValueError("n_items and n_anchors must be positive")
    if checkout_rate < 0 or cart_rate < 0 or checkout_rate + cart_rate > 1:
        raise ValueError("checkout_rate and cart_rate must be nonnegative and sum to at most 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    gaps = 1 + rng.poisson(mean_gap_ms, size=n_events)
    ts = start_ts + np.cumsum(gaps)
    anchors = rng.integers(0, n_anchors, size=n_events)
    items = rng.integers(0, n_items, size=n_events)
    u = rng.random(n_events)
    kinds = np.where(
        u < checkout_rate, 1, np.where(u < checkout_rate + cart_rate, 2, 0)
    )
    lookup = (EventKind.REC_CLICK, EventKind.CHECKOUT, EventKind.ADD_TO_CART)
    aw, iw = len(str(n_anchors - 1)), len(str(n_items - 1))
    return [
        Event(int(t), lookup[k], f"a{a:0{aw}d}", f"i{i:0{iw}d}")
        for t, k, a, i in zip(ts, kinds, anchors, items)
    ]
