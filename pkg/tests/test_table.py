import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rankdecay.core import AnchorList, Insertion
from rankdecay.events import Event, EventKind, generate_log
from rankdecay.exceptions import UnsortedLogError
from rankdecay.snapshot import Snapshot, dumps, loads
from rankdecay.table import (
    DAY_MS,
    EngineConfig,
    Recents,
    RecTable,
    compute_alphas_from_log,
    effective_kind,
    process_event,
    process_log,
    top_k,
)

RC, CO, AC = EventKind.REC_CLICK, EventKind.CHECKOUT, EventKind.ADD_TO_CART


def cfg(**kw):
    base = dict(alpha_rec=0.9, alpha_checkout=0.8, alpha_cart=0.7)
    base.update(kw)
    return EngineConfig(**base)


def two_anchor_table():
    return RecTable(
        [AnchorList.from_dict("A", {"B1": 0.5, "B2": 0.5}), AnchorList.from_dict("C", {"B1": 1.0})]
    )


class TestProcessEvent:
    def test_propagation_example(self):
        table = two_anchor_table()
        process_event(table, Event(1, RC, "A", "B1"), cfg(), Recents())
        assert table.get("A").as_dict() == pytest.approx({"B1": 0.55, "B2": 0.45})
        assert table.get("C").as_dict() == {"B1": 1.0}

    def test_propagation_reaches_other_lists(self):
        table = RecTable(
            [AnchorList.from_dict("A", {"B1": 0.5, "B2": 0.5}), AnchorList.from_dict("C", {"B1": 0.2, "B3": 0.8})]
        )
        process_event(table, Event(1, RC, "A", "B1"), cfg(), Recents())
        assert table.get("C").as_dict() == pytest.approx({"B1": 0.28, "B3": 0.72})

    def test_no_propagation(self):
        table = RecTable(
            [AnchorList.from_dict("A", {"B1": 0.5, "B2": 0.5}), AnchorList.from_dict("C", {"B1": 0.2, "B3": 0.8})]
        )
        before = table.get("C")
        process_event(table, Event(1, RC, "A", "B1"), cfg(propagate=False), Recents())
        assert table.get("C") == before
        assert table.get("A").as_dict() == pytest.approx({"B1": 0.55, "B2": 0.45})

    def test_empty_table(self):
        table = RecTable()
        process_event(table, Event(1, RC, "A", "B1"), cfg(), Recents())
        assert table.get("A").as_dict() == {"B1": 1.0}
        assert table.reverse == {"B1": {"A"}}

    def test_no_insertion_into_other_anchors(self):
        table = two_anchor_table()
        process_event(table, Event(1, RC, "C", "B9"), cfg(), Recents())
        assert "B9" not in table.get("A")
        assert table.anchors_containing("B9") == {"C"}

    def test_alpha_by_recency(self):
        recents = Recents()
        table = RecTable([AnchorList.from_dict("A", {"B1": 0.5, "B2": 0.5})])
        config = cfg()
        process_event(table, Event(1000, CO, "X", "B1"), config, recents)
        assert "B1" in recents.checkouts
        assert effective_kind(Event(2000, RC, "A", "B1"), recents) is CO
        process_event(table, Event(2000, RC, "A", "B1"), config, recents)
        # The checkout itself propagated to A, then the click used alpha_checkout again.
        assert table.get("A").get("B2") == pytest.approx(0.5 * 0.8 * 0.8)

    def test_recency_expires(self):
        recents = Recents()
        table = RecTable()
        config = cfg(recent_window=1000)
        process_event(table, Event(1, AC, "X", "B1"), config, recents)
        assert effective_kind(Event(500, RC, "A", "B1"), recents) is AC
        process_event(table, Event(5000, RC, "A", "B2"), config, recents)
        assert len(recents.carts) == 0
        assert effective_kind(Event(5001, RC, "A", "B1"), recents) is RC

    def test_precedence(self):
        recents = Recents()
        recents.checkouts.add("B", 1)
        recents.carts.add("B", 1)
        assert effective_kind(Event(2, RC, "A", "B"), recents) is CO
        assert effective_kind(Event(2, AC, "A", "C"), recents) is AC
        assert effective_kind(Event(2, RC, "A", "C"), recents) is RC


class TestProcessLog:
    LOG = [Event(1, RC, "A", "B1"), Event(2, RC, "A", "B2"), Event(3, RC, "A", "B1")]

    def test_three_clicks_min_prob(self):
        # {B1:1} -> insert B2 at masses (1, 0.5) -> (2/3, 1/3) -> click B1.
        table, _, stats = process_log(RecTable(), self.LOG, cfg(insertion=Insertion.MIN_PROB))
        assert table.get("A").as_dict() == pytest.approx({"B1": 0.9 * 2 / 3 + 0.1, "B2": 0.9 / 3}, abs=1e-12)
        assert stats.processed == 3

    def test_three_clicks_max_entropy(self):
        # {B1:1} has zero entropy, so B2 enters at 1/2; then click B1.
        table, _, _ = process_log(RecTable(), self.LOG, cfg())
        assert table.get("A").as_dict() == pytest.approx({"B1": 0.55, "B2": 0.45}, abs=1e-12)

    def test_empty_log(self):
        table = two_anchor_table()
        out, recents, stats = process_log(table, [], cfg())
        assert out == table
        assert stats.processed == stats.rejected == stats.anchors == 0
        assert all(v == 0 for v in stats.by_kind.values())

    def test_input_not_mutated(self):
        table = two_anchor_table()
        before = dumps(Snapshot(table))
        process_log(table, self.LOG, cfg())
        assert dumps(Snapshot(table)) == before

    def test_unsorted(self):
        with pytest.raises(UnsortedLogError) as exc:
            process_log(RecTable(), [Event(5, RC, "A", "B"), Event(6, RC, "A", "B"), Event(4, RC, "A", "B")], cfg())
        assert exc.value.index == 2

    def test_equal_timestamps_keep_file_order(self):
        log = [Event(5, RC, "A", "B"), Event(5, RC, "A", "C")]
        table, _, _ = process_log(RecTable(), log, cfg())
        assert set(table.get("A").items) == {"B", "C"}

    def test_malformed_skipped(self):
        log = [Event(1, RC, "A", "B"), Event(2, RC, "", "B"), Event(0, RC, "A", "B"), Event(3, RC, "A", "C")]
        table, _, stats = process_log(RecTable(), log, cfg())
        assert (stats.processed, stats.rejected, stats.anchors) == (2, 2, 1)
        assert stats.by_kind == {"rec_click": 2, "checkout": 0, "add_to_cart": 0}

    def test_deterministic(self):
        log = generate_log(n_events=2000, seed=5)
        a = process_log(RecTable(), log, cfg())
        b = process_log(RecTable(), log, cfg())
        assert dumps(Snapshot(a[0], a[1], cfg())) == dumps(Snapshot(b[0], b[1], cfg()))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.booleans(), st.sampled_from(list(Insertion)))
def test_reverse_index_consistent(seed, propagate, insertion):
    log = generate_log(n_items=15, n_anchors=6, n_events=300, seed=seed)
    table, _, _ = process_log(RecTable(), log, cfg(propagate=propagate, insertion=insertion))
    assert table.reverse == table.rebuild_reverse()
    for lst in table.lists.values():
        assert abs(math.fsum(lst.probs) - 1) <= 1e-9


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 9))
def test_chunked_replay_equivalence(seed, n_chunks):
    log = generate_log(n_items=12, n_anchors=5, n_events=400, seed=seed)
    config = cfg(recent_window=30 * 60_000)
    one_shot, rec1, _ = process_log(RecTable(), log, config)
    snap = Snapshot(config=config)
    size = math.ceil(len(log) / n_chunks)
    for i in range(0, len(log), size):
        t, r, _ = process_log(snap.table, log[i : i + size], config, snap.recents)
        snap = loads(dumps(Snapshot(t, r, config)))
    assert snap.table == one_shot
    assert snap.recents == rec1


def test_propagation_locality():
    rng = random.Random(3)
    log = generate_log(n_items=10, n_anchors=8, n_events=500, seed=9)
    table, recents, _ = process_log(RecTable(), log, cfg())
    for _ in range(50):
        ev = Event(log[-1].ts + 1, RC, f"a{rng.randrange(8)}", f"i{rng.randrange(10)}")
        before = dict(table.lists)
        holders = set(table.anchors_containing(ev.item)) | {ev.anchor}
        process_event(table, ev, cfg(), recents)
        for anchor, lst in before.items():
            if anchor not in holders:
                assert table.lists[anchor] is lst


class TestAlphas:
    def test_remark_example(self):
        period = 1_000_000
        log = [Event(1 + i * period // 9, RC, "A", f"B{i}") for i in range(10)]
        assert log[-1].ts - log[0].ts == period
        alphas = compute_alphas_from_log(log, period)
        assert alphas.rec == pytest.approx(math.exp(-math.log(2) / 10))
        assert alphas.rec == pytest.approx(0.933, abs=1e-3)

    def test_defaults_for_missing_kinds(self):
        log = [Event(1, RC, "A", "B"), Event(11, RC, "A", "C")]
        defaults = cfg()
        alphas = compute_alphas_from_log(log, 10, defaults)
        assert alphas.checkout == defaults.alpha_checkout
        assert alphas.cart == defaults.alpha_cart

    def test_clamp(self):
        # One event per anchor per period gives exactly 0.5; fewer would go below.
        log = [Event(1, RC, "A", "B"), Event(11, RC, "C", "B")]
        assert compute_alphas_from_log(log, 10).rec == 0.5
        assert compute_alphas_from_log(log, 1).rec == 0.5
        assert compute_alphas_from_log(log, 10**9).rec == 0.9999

    def test_per_kind(self):
        log = [Event(1 + i, RC, "A", "B") for i in range(100)]
        log += [Event(200, CO, "A", "B"), Event(201, AC, "A", "B"), Event(202, AC, "A", "C")]
        alphas = compute_alphas_from_log(sorted(log, key=lambda e: e.ts), 1000)
        assert alphas.cart < alphas.rec
        assert alphas.checkout < alphas.cart

    @given(st.integers(2, 200), st.integers(2, 200))
    def test_monotone_in_rate(self, n1, n2):
        def alpha(n):
            log = [Event(1 + i * 1000 // (n - 1), RC, "A", "B") for i in range(n)]
            return compute_alphas_from_log(log, 1000).rec

        if n1 < n2:
            assert alpha(n1) <= alpha(n2)

    def test_errors(self):
        with pytest.raises(ValueError):
            compute_alphas_from_log([], 10)
        with pytest.raises(ValueError):
            compute_alphas_from_log([Event(5, RC, "A", "B"), Event(5, RC, "A", "C")], 10)


class TestTopK:
    def test_examples(self):
        table = RecTable([AnchorList.from_dict("A", {"B1": 0.55, "B2": 0.45})])
        assert top_k(table, "A", 1) == [("B1", 0.55)]
        assert top_k(table, "Z", 3) == []
        assert top_k(table, "A", 10) == [("B1", 0.55), ("B2", 0.45)]

    def test_tie_break(self):
        table = RecTable([AnchorList.from_dict("A", {"b": 0.25, "a": 0.25, "c": 0.5})])
        assert [k for k, _ in top_k(table, "A", 3)] == ["c", "a", "b"]

    def test_k_validated(self):
        with pytest.raises(ValueError):
            top_k(RecTable(), "A", 0)


def test_config_validation():
    with pytest.raises(ValueError):
        EngineConfig(alpha_rec=1.5)
    with pytest.raises(ValueError):
        EngineConfig(recent_window=0)
    with pytest.raises(ValueError):
        EngineConfig.from_dict({"bogus": 1})
    assert EngineConfig().recent_window == DAY_MS
    assert EngineConfig.from_dict(cfg().to_dict()) == cfg()
