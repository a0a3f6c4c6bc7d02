"""scikit-learn compatible front end over the replay engine."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .core import DEFAULT_EPSILON, DEFAULT_HALF_LIFE, alpha_from_half_life
from .events import Event, EventKind
from .exceptions import LogFormatError
from .snapshot import Snapshot, load_snapshot, save_snapshot
from .table import DAY_MS, WEEK_MS, EngineConfig, Recents, RecTable, compute_alphas_from_log, process_log, top_k


def check_events(X):
    """Coerce ``X`` into a list of :class:`Event`.

    Accepts events, mappings with ``ts``/``kind``/``anchor``/``item`` keys,
    4-tuples in that order, or a DataFrame with those columns.
    """
    if hasattr(X, "to_dict") and hasattr(X, "columns"):
        X = X.to_dict("records")
    events = []
    for row in X:
        if isinstance(row, Event):
            events.append(row)
        elif isinstance(row, dict):
            ev = Event.from_mapping(row)
            events.append(Event(_as_int(ev.ts), ev.kind, ev.anchor, ev.item))
        elif isinstance(row, (tuple, list)) and len(row) == 4:
            ts, kind, anchor, item = row
            try:
                kind = EventKind(kind)
            except ValueError:
                raise LogFormatError(f"unknown event kind {kind!r}") from None
            events.append(Event(_as_int(ts), kind, anchor, item))
        else:
            raise TypeError(f"cannot interpret {row!r} as an event")
    return events


def _as_int(ts):
    # DataFrame rows carry numpy integers; other types are left for validate() to reject.
    return int(ts) if isinstance(ts, np.integer) else ts


class DecayRecommender(BaseEstimator):
    """Item-to-item recommender whose ranks decay with every click.

    ``fit`` replays an event log from an empty state; ``partial_fit``
    continues from the fitted state, mirroring periodic batch replay.

    Parameters
    ----------
    alpha_rec, alpha_checkout, alpha_cart : float or None
        Decay parameter per event kind.  ``None`` derives it from
        ``half_life``.
    half_life : float
        Updates after which an idle item keeps half its probability.
    epsilon : float
        Pruning threshold.
    insertion : {"max_entropy", "min_prob"}
    period_of_interest, recent_window : int
        Durations in milliseconds.
    propagate : bool
        Apply a click on an item to every list recommending it.
    auto_alpha : bool
        Re-estimate the three decay parameters from each batch.

    Attributes
    ----------
    table_ : RecTable
    recents_ : Recents
    config_ : EngineConfig
    stats_ : ReplayStats
        Statistics of the most recent batch.
    """

    def __init__(
        self,
        alpha_rec=None,
        alpha_checkout=None,
        alpha_cart=None,
        half_life=DEFAULT_HALF_LIFE,
        epsilon=DEFAULT_EPSILON,
        insertion="max_entropy",
        period_of_interest=WEEK_MS,
        recent_window=DAY_MS,
        propagate=True,
        auto_alpha=False,
    ):
        self.alpha_rec = alpha_rec
        self.alpha_checkout = alpha_checkout
        self.alpha_cart = alpha_cart
        self.half_life = half_life
        self.epsilon = epsilon
        self.insertion = insertion
        self.period_of_interest = period_of_interest
        self.recent_window = recent_window
        self.propagate = propagate
        self.auto_alpha = auto_alpha

    def _make_config(self):
        base = alpha_from_half_life(self.half_life)
        return EngineConfig(
            alpha_rec=base if self.alpha_rec is None else self.alpha_rec,
            alpha_checkout=base if self.alpha_checkout is None else self.alpha_checkout,
            alpha_cart=base if self.alpha_cart is None else self.alpha_cart,
            epsilon=self.epsilon,
            insertion=self.insertion,
            period_of_interest=self.period_of_interest,
            recent_window=self.recent_window,
            propagate=self.propagate,
        )

    def fit(self, X, y=None):
        self.config_ = self._make_config()
        self.table_ = RecTable()
        self.recents_ = Recents()
        self.last_ts_ = 0
        return self.partial_fit(X)

    def partial_fit(self, X, y=None):
        if not hasattr(self, "table_"):
            return self.fit(X)
        events = check_events(X)
        if self.auto_alpha and events:
            alphas = compute_alphas_from_log(events, self.config_.period_of_interest, self.config_)
            self.config_ = self.config_.replace(
                alpha_rec=alphas.rec, alpha_checkout=alphas.checkout, alpha_cart=alphas.cart
            )
        self.table_, self.recents_, self.stats_ = process_log(self.table_, events, self.config_, self.recents_)
        valid_ts = [ev.ts for ev in events if isinstance(ev.ts, int) and ev.ts > 0]
        if valid_ts:
            self.last_ts_ = max(self.last_ts_, max(valid_ts))
        return self

    def predict(self, X, k=10):
        """Top-``k`` recommended item ids for each anchor in ``X``."""
        check_is_fitted(self, "table_")
        if isinstance(X, str):
            X = [X]
        return [[item for item, _ in top_k(self.table_, a, k)] for a in X]

    def predict_proba(self, X):
        """Full ``{item: probability}`` mapping for each anchor in ``X``."""
        check_is_fitted(self, "table_")
        if isinstance(X, str):
            X = [X]
        return [self.table_.get(a).as_dict() for a in X]

    def to_snapshot(self):
        check_is_fitted(self, "table_")
        return Snapshot(self.table_, self.recents_, self.config_, created_at=self.last_ts_)

    def save(self, path):
        save_snapshot(path, self.to_snapshot())

    @classmethod
    def from_snapshot(cls, snapshot, **params):
        if not isinstance(snapshot, Snapshot):
            snapshot = load_snapshot(snapshot)
        cfg = snapshot.config
        est = cls(
            alpha_rec=cfg.alpha_rec,
            alpha_checkout=cfg.alpha_checkout,
            alpha_cart=cfg.alpha_cart,
            epsilon=cfg.epsilon,
            insertion=cfg.insertion.value,
            period_of_interest=cfg.period_of_interest,
            recent_window=cfg.recent_window,
            propagate=cfg.propagate,
        )
        est.set_params(**params)
        est.config_ = est._make_config()
        est.table_ = snapshot.table
        est.recents_ = snapshot.recents
        est.last_ts_ = snapshot.created_at
        return est
