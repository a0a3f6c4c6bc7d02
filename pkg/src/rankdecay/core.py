"""Categorical distributions over recommendation lists and their update rules.

Every function here is pure: it takes an :class:`AnchorList` and returns a
new one.  Item order inside an ``AnchorList`` is canonical (descending
probability, ties broken by item id) so equal distributions compare equal
and serialize identically.
"""

from __future__ import annotations

import bisect
import enum
import math
import operator
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .exceptions import ContractViolation
from .validation import check_item_id, check_open_unit

SUM_ATOL = 1e-9
DEFAULT_EPSILON = 0.001
DEFAULT_HALF_LIFE = 10.0


class Insertion(str, enum.Enum):
    """Strategy for adding a clicked item that is not yet in the list."""

    MIN_PROB = "min_prob"
    MAX_ENTROPY = "max_entropy"


def _canonical(pairs):
    return sorted(pairs, key=lambda kv: (-kv[1], kv[0]))


@dataclass(frozen=True)
class AnchorList:
    """Recommendation list of one anchor item with its click distribution.

    ``items`` and ``probs`` are re-ordered on construction into descending
    probability with lexicographic tie-break.  An empty list is legal and
    stands for an anchor with no recorded clicks yet.
    """

    anchor: str
    items: tuple = ()
    probs: tuple = ()

    def __post_init__(self):
        items = tuple(self.items)
        probs = tuple(float(p) for p in self.probs)
        if len(items) != len(probs):
            raise ValueError("items and probs must have the same length")
        if len(set(items)) != len(items):
            raise ValueError("items must not contain duplicates")
        for it in items:
            check_item_id(it)
        for p in probs:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability {p!r} outside [0, 1]")
        if items and abs(math.fsum(probs) - 1.0) > SUM_ATOL:
            raise ValueError(f"probabilities sum to {math.fsum(probs)!r}, not 1")
        ordered = _canonical(zip(items, probs))
        object.__setattr__(self, "items", tuple(k for k, _ in ordered))
        object.__setattr__(self, "probs", tuple(v for _, v in ordered))

    @classmethod
    def from_dict(cls, anchor, mapping):
        return cls(anchor, tuple(mapping), tuple(mapping.values()))

    @classmethod
    def _trusted(cls, anchor, pairs):
        # Skips validation; callers guarantee the invariants by construction.
        ordered = _canonical(pairs)
        return cls._ordered(anchor, tuple(k for k, _ in ordered), tuple(v for _, v in ordered))

    @classmethod
    def _ordered(cls, anchor, items, probs):
        # Trusts that probs are non-increasing; only ties need the id tie-break.
        if len(set(probs)) != len(probs):
            ordered = _canonical(zip(items, probs))
            items = tuple(k for k, _ in ordered)
            probs = tuple(v for _, v in ordered)
        obj = object.__new__(cls)
        object.__setattr__(obj, "anchor", anchor)
        object.__setattr__(obj, "items", tuple(items))
        object.__setattr__(obj, "probs", tuple(probs))
        return obj

    def __len__(self):
        return len(self.items)

    def __contains__(self, item):
        return item in self.items

    def index(self, item):
        return self.items.index(item)

    def get(self, item, default=0.0):
        try:
            return self.probs[self.items.index(item)]
        except ValueError:
            return default

    def as_dict(self):
        return dict(zip(self.items, self.probs))


@dataclass(frozen=True)
class DecayParams:
    """Parameters of the single-list click update.

    Parameters
    ----------
    alpha : float
        Rank reduction parameter in (0, 1); every click multiplies the
        probabilities of non-clicked items by ``alpha``.
    epsilon : float
        Pruning threshold in (0, 1/2).
    insertion : Insertion
        How to add a clicked item that is not yet in the list.
    """

    alpha: float = field(default_factory=lambda: alpha_from_half_life(DEFAULT_HALF_LIFE))
    epsilon: float = DEFAULT_EPSILON
    insertion: Insertion = Insertion.MAX_ENTROPY

    def __post_init__(self):
        check_open_unit(self.alpha, "alpha")
        check_open_unit(self.epsilon, "epsilon")
        if self.epsilon >= 0.5:
            raise ValueError("epsilon must be below 1/2")
        object.__setattr__(self, "insertion", Insertion(self.insertion))


def _xlogx(p):
    return p * math.log(p) if p > 0.0 else 0.0


def entropy(dist):
    """Shannon entropy in nats of an ``AnchorList`` or probability sequence."""
    probs = dist.probs if isinstance(dist, AnchorList) else dist
    return -math.fsum(_xlogx(float(p)) for p in probs)


def alpha_from_half_life(half_life):
    """Decay parameter under which an idle item halves in ``half_life`` updates."""
    if isinstance(half_life, bool) or not isinstance(half_life, (int, float)):
        raise TypeError("half_life must be a number")
    if not half_life > 0 or not math.isfinite(half_life):
        raise ValueError(f"half_life must be positive and finite, got {half_life!r}")
    return math.exp(-math.log(2.0) / half_life)


def ranks_to_probabilities(ranks: Sequence[float]) -> list[float]:
    """Convert positive ranks to a probability vector.

    Each rank is normalized to a share ``r_i / sum(r)`` and mapped to
    ``(1 - share) / (m - 1)``; a larger rank therefore yields a *smaller*
    probability.  A single rank maps to ``[1.0]``.
    """
    ranks = [float(r) for r in ranks]
    if not ranks:
        raise ValueError("ranks must not be empty")
    if any(not (r > 0) or not math.isfinite(r) for r in ranks):
        raise ValueError("ranks must be positive and finite")
    m = len(ranks)
    if m == 1:
        return [1.0]
    total = math.fsum(ranks)
    return [(1.0 - r / total) / (m - 1) for r in ranks]


def reinforce(lst: AnchorList, item: str, alpha: float) -> AnchorList:
    """Shift mass towards an item already in the list (no pruning).

    All probabilities are multiplied by ``alpha`` and the clicked item
    additionally receives ``1 - alpha``.
    """
    if item not in lst.items:
        raise ContractViolation(f"{item!r} is not in the list of {lst.anchor!r}")
    j = lst.items.index(item)
    value = alpha * lst.probs[j] + (1.0 - alpha)
    items = lst.items[:j] + lst.items[j + 1 :]
    probs = [alpha * p for p in lst.probs[:j] + lst.probs[j + 1 :]]
    return _place(lst.anchor, items, probs, item, value)


def _place(anchor, items, probs, item, value):
    # Insert (item, value) into the descending sequence (items, probs).
    pos = bisect.bisect_left(probs, -value, key=operator.neg)
    probs.insert(pos, value)
    return AnchorList._ordered(anchor, items[:pos] + (item,) + items[pos:], probs)


def _require_absent(lst, item):
    check_item_id(item)
    if item in lst.items:
        raise ContractViolation(f"{item!r} is already in the list of {lst.anchor!r}")
    if not lst.items:
        raise ContractViolation("insertion requires a non-empty list")


def insert_min_prob(lst: AnchorList, item: str) -> AnchorList:
    """Add ``item`` with half the current minimum mass, then renormalize."""
    _require_absent(lst, item)
    mass = lst.probs[-1] / 2.0
    total = math.fsum(lst.probs) + mass
    return AnchorList._ordered(lst.anchor, lst.items + (item,), [p / total for p in lst.probs] + [mass / total])


def insert_max_entropy(lst: AnchorList, item: str) -> AnchorList:
    """Add ``item`` by the entropy-maximizing mixture with its point mass.

    With ``h = sum p log p`` (minus the entropy of the list) the existing
    probabilities are scaled by ``1 / (1 + exp(h))`` and the new item gets
    ``exp(h) / (1 + exp(h))``.
    """
    _require_absent(lst, item)
    eh = math.exp(-entropy(lst))
    keep = 1.0 / (1.0 + eh)
    return _place(lst.anchor, lst.items, [keep * p for p in lst.probs], item, eh / (1.0 + eh))


def max_entropy_click_alpha(lst: AnchorList, index: int) -> tuple[float, AnchorList]:
    """Mixture weight maximizing entropy after a click at position ``index``.

    The mixture keeps mass ``alpha * p_j`` at every ``j != index``.  The
    optimum is ``alpha = 1 / (q + exp(c / q))`` where ``q = 1 - p_index`` and
    ``c = sum_{j != index} p_j log p_j``.  The optimum can exceed 1 when the
    clicked item already dominates; the result is still a distribution.

    Returns
    -------
    alpha : float
    updated : AnchorList
    """
    if len(lst) < 2:
        raise ContractViolation("max-entropy click requires at least two items")
    if not 0 <= index < len(lst):
        raise IndexError(f"index {index} out of range for list of length {len(lst)}")
    p_i = lst.probs[index]
    if p_i == 1.0:
        return 1.0, lst
    others = [p for j, p in enumerate(lst.probs) if j != index]
    q = math.fsum(others)
    c = math.fsum(_xlogx(p) for p in others)
    ec = math.exp(c / q)
    alpha = 1.0 / (q + ec)
    pairs = []
    for j, (k, p) in enumerate(zip(lst.items, lst.probs)):
        pairs.append((k, ec / (q + ec)) if j == index else (k, alpha * p))
    return alpha, AnchorList._trusted(lst.anchor, pairs)


def prune(lst: AnchorList, epsilon: float) -> AnchorList:
    """Drop items below ``epsilon`` and rescale the survivors to sum to one.

    If every item is below the threshold the most probable one is kept with
    probability one.
    """
    if not lst.items or lst.probs[-1] >= epsilon:
        return lst
    cut = bisect.bisect_left(lst.probs, -epsilon, key=operator.neg)
    while cut < len(lst.probs) and lst.probs[cut] >= epsilon:
        cut += 1
    if cut == 0:
        return AnchorList._ordered(lst.anchor, lst.items[:1], (1.0,))
    total = math.fsum(lst.probs[:cut])
    return AnchorList._ordered(lst.anchor, lst.items[:cut], [p / total for p in lst.probs[:cut]])


def click_update(lst: AnchorList, item: str, params: DecayParams) -> AnchorList:
    """Apply one recommendation click on ``item`` to the anchor's list.

    Reinforces an existing item, seeds an empty list with ``{item: 1}``, or
    inserts an unseen item with the configured strategy, then prunes.
    """
    check_item_id(item)
    if not lst.items:
        return AnchorList._trusted(lst.anchor, [(item, 1.0)])
    if item in lst.items:
        updated = reinforce(lst, item, params.alpha)
    elif params.insertion is Insertion.MIN_PROB:
        updated = insert_min_prob(lst, item)
    else:
        updated = insert_max_entropy(lst, item)
    return prune(updated, params.epsilon)


def uniform(anchor: str, items: Iterable[str]) -> AnchorList:
    """Equal-probability list over ``items``; handy for bootstrapping."""
    items = list(items)
    if not items:
        return AnchorList(anchor)
    return AnchorList(anchor, tuple(items), (1.0 / len(items),) * len(items))


def from_ranks(anchor: str, ranked: Sequence[tuple[str, float]]) -> AnchorList:
    """Bootstrap a list from another recommender's ``(item, rank)`` pairs."""
    items = [k for k, _ in ranked]
    probs = ranks_to_probabilities([r for _, r in ranked])
    total = math.fsum(probs)
    return AnchorList(anchor, tuple(items), tuple(p / total for p in probs))
