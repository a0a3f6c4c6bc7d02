"""Multi-anchor state and batch replay of event logs.

A :class:`RecTable` maps every anchor to its :class:`~rankdecay.core.AnchorList`
and keeps a reverse index from item to the anchors whose lists contain it,
so a click on an item can be propagated to every list that recommends it.
"""

from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import asdict, dataclass, field

from .core import (
    DEFAULT_EPSILON,
    DEFAULT_HALF_LIFE,
    AnchorList,
    DecayParams,
    Insertion,
    alpha_from_half_life,
    click_update,
    prune,
    reinforce,
)
from .events import Event, EventKind
from .exceptions import InvalidEventError, UnsortedLogError
from .validation import check_open_unit, check_positive

HOUR_MS = 3_600_000
DAY_MS = 24 * HOUR_MS
WEEK_MS = 7 * DAY_MS

ALPHA_MIN = 0.5
ALPHA_MAX = 0.9999


def _default_alpha():
    return alpha_from_half_life(DEFAULT_HALF_LIFE)


@dataclass(frozen=True)
class EngineConfig:
    """Replay configuration.  Durations are in milliseconds."""

    alpha_rec: float = field(default_factory=_default_alpha)
    alpha_checkout: float = field(default_factory=_default_alpha)
    alpha_cart: float = field(default_factory=_default_alpha)
    epsilon: float = DEFAULT_EPSILON
    insertion: Insertion = Insertion.MAX_ENTROPY
    period_of_interest: int = WEEK_MS
    recent_window: int = DAY_MS
    propagate: bool = True

    def __post_init__(self):
        for name in ("alpha_rec", "alpha_checkout", "alpha_cart"):
            object.__setattr__(self, name, check_open_unit(getattr(self, name), name))
        check_open_unit(self.epsilon, "epsilon")
        if self.epsilon >= 0.5:
            raise ValueError("epsilon must be below 1/2")
        object.__setattr__(self, "insertion", Insertion(self.insertion))
        check_positive(self.period_of_interest, "period_of_interest", integer=True)
        check_positive(self.recent_window, "recent_window", integer=True)
        if not isinstance(self.propagate, bool):
            raise TypeError("propagate must be a bool")

    def alpha_for(self, kind):
        if kind is EventKind.CHECKOUT:
            return self.alpha_checkout
        if kind is EventKind.ADD_TO_CART:
            return self.alpha_cart
        return self.alpha_rec

    def params(self, kind=EventKind.REC_CLICK):
        return DecayParams(self.alpha_for(kind), self.epsilon, self.insertion)

    def to_dict(self):
        d = asdict(self)
        d["insertion"] = self.insertion.value
        return d

    @classmethod
    def from_dict(cls, d):
        known = {k: d[k] for k in cls.__dataclass_fields__ if k in d}
        unknown = set(d) - set(known)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**known)

    def replace(self, **changes):
        d = self.to_dict()
        d.update({k: v for k, v in changes.items() if v is not None})
        return type(self).from_dict(d)


class RecentItems:
    """Sliding record of ``(item, ts)`` pairs no older than a time window."""

    def __init__(self, entries=()):
        self._entries = deque()
        self._counts = Counter()
        for item, ts in entries:
            self.add(item, ts)

    def add(self, item, ts):
        self._entries.append((item, int(ts)))
        self._counts[item] += 1

    def expire(self, now, window):
        cutoff = now - window
        while self._entries and self._entries[0][1] < cutoff:
            item, _ = self._entries.popleft()
            self._counts[item] -= 1
            if not self._counts[item]:
                del self._counts[item]

    def __contains__(self, item):
        return item in self._counts

    def __len__(self):
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    def __eq__(self, other):
        return isinstance(other, RecentItems) and list(self) == list(other)

    def copy(self):
        return RecentItems(self._entries)


@dataclass
class Recents:
    """Recently checked-out and added-to-cart items."""

    checkouts: RecentItems = field(default_factory=RecentItems)
    carts: RecentItems = field(default_factory=RecentItems)

    def expire(self, now, window):
        self.checkouts.expire(now, window)
        self.carts.expire(now, window)

    def copy(self):
        return Recents(self.checkouts.copy(), self.carts.copy())

    def to_dict(self):
        return {
            "checkouts": [[i, t] for i, t in self.checkouts],
            "carts": [[i, t] for i, t in self.carts],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            RecentItems((i, t) for i, t in d.get("checkouts", [])),
            RecentItems((i, t) for i, t in d.get("carts", [])),
        )


class RecTable:
    """Collection of anchor lists with an item -> anchors reverse index."""

    def __init__(self, lists=None):
        self.lists = {}
        self.reverse = {}
        if isinstance(lists, dict):
            lists = lists.values()
        for lst in lists or ():
            self.set_list(lst)

    def __len__(self):
        return len(self.lists)

    def __contains__(self, anchor):
        return anchor in self.lists

    def __eq__(self, other):
        return isinstance(other, RecTable) and self.lists == other.lists

    def __repr__(self):
        return f"RecTable({len(self.lists)} anchors)"

    def get(self, anchor):
        lst = self.lists.get(anchor)
        return lst if lst is not None else AnchorList(anchor)

    def set_list(self, lst):
        old = self.lists.get(lst.anchor)
        old_items = set(old.items) if old is not None else set()
        new_items = set(lst.items)
        if old_items == new_items:
            self.lists[lst.anchor] = lst
            return
        for item in old_items - new_items:
            anchors = self.reverse[item]
            anchors.discard(lst.anchor)
            if not anchors:
                del self.reverse[item]
        for item in new_items - old_items:
            self.reverse.setdefault(item, set()).add(lst.anchor)
        self.lists[lst.anchor] = lst

    def anchors_containing(self, item):
        return self.reverse.get(item, set())

    def rebuild_reverse(self):
        reverse = {}
        for anchor, lst in self.lists.items():
            for item in lst.items:
                reverse.setdefault(item, set()).add(anchor)
        return reverse

    def copy(self):
        new = RecTable()
        new.lists = dict(self.lists)
        new.reverse = {k: set(v) for k, v in self.reverse.items()}
        return new


@dataclass
class ReplayStats:
    processed: int = 0
    rejected: int = 0
    by_kind: dict = field(default_factory=lambda: {k.value: 0 for k in EventKind})
    anchors: int = 0

    def to_dict(self):
        return asdict(self)


def effective_kind(event, recents):
    """Kind whose decay parameter governs ``event``.

    Checkout outranks add-to-cart, which outranks a plain click; an item
    counts as checked out (added to cart) when the event itself is one or
    the item is in the corresponding recency list.
    """
    if event.kind is EventKind.CHECKOUT or event.item in recents.checkouts:
        return EventKind.CHECKOUT
    if event.kind is EventKind.ADD_TO_CART or event.item in recents.carts:
        return EventKind.ADD_TO_CART
    return EventKind.REC_CLICK


def process_event(table, event, config, recents):
    """Apply one event to ``table`` and ``recents`` in place.

    Raises :class:`InvalidEventError` for a malformed event, leaving both
    untouched.
    """
    event.validate()
    recents.expire(event.ts, config.recent_window)
    params = config.params(effective_kind(event, recents))

    table.set_list(click_update(table.get(event.anchor), event.item, params))
    if config.propagate:
        for anchor in sorted(table.anchors_containing(event.item) - {event.anchor}):
            lst = reinforce(table.lists[anchor], event.item, params.alpha)
            table.set_list(prune(lst, params.epsilon))

    if event.kind is EventKind.CHECKOUT:
        recents.checkouts.add(event.item, event.ts)
    elif event.kind is EventKind.ADD_TO_CART:
        recents.carts.add(event.item, event.ts)
    return table


def check_sorted(events):
    """Raise :class:`UnsortedLogError` at the first timestamp decrease.

    Events with invalid timestamps are skipped; replay rejects them anyway.
    """
    last = None
    for idx, ev in enumerate(events):
        if isinstance(ev.ts, bool) or not isinstance(ev.ts, int) or ev.ts <= 0:
            continue
        if last is not None and ev.ts < last:
            raise UnsortedLogError(idx)
        last = ev.ts


def process_log(table, events, config, recents=None):
    """Replay an ordered event log on a copy of ``table``.

    Returns
    -------
    table : RecTable
    recents : Recents
    stats : ReplayStats
    """
    events = list(events)
    check_sorted(events)
    table = table.copy() if table is not None else RecTable()
    recents = recents.copy() if recents is not None else Recents()
    stats = ReplayStats()
    touched = set()
    for ev in events:
        try:
            process_event(table, ev, config, recents)
        except InvalidEventError:
            stats.rejected += 1
            continue
        stats.processed += 1
        stats.by_kind[ev.kind.value] += 1
        touched.add(ev.anchor)
    stats.anchors = len(touched)
    return table, recents, stats


@dataclass(frozen=True)
class Alphas:
    rec: float
    checkout: float
    cart: float

    def to_dict(self):
        return {"alpha_rec": self.rec, "alpha_checkout": self.checkout, "alpha_cart": self.cart}


def alpha_from_rate(events_per_period):
    """Half-life decay parameter for ``events_per_period``, clamped."""
    alpha = math.exp(-math.log(2.0) / events_per_period)
    return min(max(alpha, ALPHA_MIN), ALPHA_MAX)


def compute_alphas_from_log(events, period_of_interest, defaults=None):
    """Per-kind decay parameters from the average per-anchor event rate.

    For each kind the rate is ``count / (distinct anchors * log duration)``;
    the expected number of events per anchor during ``period_of_interest``
    becomes the half-life.  Kinds absent from the log keep the value from
    ``defaults`` (an :class:`EngineConfig`).
    """
    period_of_interest = check_positive(period_of_interest, "period_of_interest")
    defaults = defaults or EngineConfig()
    events = [ev for ev in events if _is_valid(ev)]
    if not events:
        raise ValueError("cannot estimate decay parameters from an empty log")
    duration = max(ev.ts for ev in events) - min(ev.ts for ev in events)
    if duration <= 0:
        raise ValueError("log spans zero duration")
    counts = Counter(ev.kind for ev in events)
    anchors = {k: set() for k in EventKind}
    for ev in events:
        anchors[ev.kind].add(ev.anchor)
    out = {}
    for kind in EventKind:
        if counts[kind] == 0:
            out[kind] = defaults.alpha_for(kind)
            continue
        rate = counts[kind] / (len(anchors[kind]) * duration)
        out[kind] = alpha_from_rate(rate * period_of_interest)
    return Alphas(out[EventKind.REC_CLICK], out[EventKind.CHECKOUT], out[EventKind.ADD_TO_CART])


def _is_valid(ev):
    try:
        ev.validate()
    except InvalidEventError:
        return False
    return True


def top_k(table, anchor, k):
    """Up to ``k`` ``(item, probability)`` pairs, most probable first."""
    k = check_positive(k, "k", integer=True)
    lst = table.lists.get(anchor)
    if lst is None:
        return []
    return list(zip(lst.items[:k], lst.probs[:k]))
