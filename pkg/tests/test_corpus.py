from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qreform.corpus import (DEFAULT_SIGNAL_WEIGHTS, Engagement, SessionEvent,
                            SessionLog, Taxonomy, engagement_score, load_log,
                            normalize, write_log)
from qreform.errors import ConfigError, ValidationError

from conftest import make_event


class TestNormalize:
    def test_case_and_whitespace_folding(self):
        assert normalize("Nike  Air   Jordan 4") == ["nike", "air", "jordan", "4"]

    def test_plain_query_passthrough(self):
        assert normalize("iphone 14 plus case") == ["iphone", "14", "plus", "case"]

    def test_empty_and_punctuation_only(self):
        assert normalize("") == []
        assert normalize("!!! ... ---") == []

    def test_edge_punctuation_stripped_interior_kept(self):
        assert normalize("'size' 13-inch mr.children") == ["size", "13-inch", "mr.children"]

    @given(st.text())
    def test_idempotent(self, raw):
        tokens = normalize(raw)
        assert normalize(" ".join(tokens)) == tokens

    @given(st.text())
    def test_deterministic_and_total(self, raw):
        assert normalize(raw) == normalize(raw)

    @given(st.text())
    def test_tokens_never_empty_or_padded(self, raw):
        for tok in normalize(raw):
            assert tok
            assert tok == tok.strip()


class TestEngagementScore:
    def test_no_engagements_scores_zero(self):
        event = make_event("s1", 1, "laptop")
        assert engagement_score(event, DEFAULT_SIGNAL_WEIGHTS) == 0.0

    def test_two_clicks(self):
        event = make_event("s1", 1, "laptop", clicks=2)
        assert engagement_score(event, DEFAULT_SIGNAL_WEIGHTS) == 2.0

    def test_click_plus_bought(self):
        # 1 click (w=1) + 1 bought (w=5) under the default config
        event = make_event("s1", 1, "laptop", clicks=1, signals=(("i9", "bought"),))
        assert engagement_score(event, DEFAULT_SIGNAL_WEIGHTS) == 6.0

    def test_unknown_signal_kind_names_it(self):
        event = make_event("s1", 1, "laptop", signals=(("i1", "teleport"),))
        with pytest.raises(ConfigError, match="teleport"):
            engagement_score(event, DEFAULT_SIGNAL_WEIGHTS)

    @given(st.lists(st.sampled_from(sorted(DEFAULT_SIGNAL_WEIGHTS)), max_size=8),
           st.lists(st.sampled_from(sorted(DEFAULT_SIGNAL_WEIGHTS)), max_size=8))
    def test_linear_in_engagement_lists(self, kinds_a, kinds_b):
        def event_for(kinds):
            return make_event("s1", 1, "q",
                              signals=tuple((f"i{i}", k) for i, k in enumerate(kinds)))
        split = (engagement_score(event_for(kinds_a), DEFAULT_SIGNAL_WEIGHTS)
                 + engagement_score(event_for(kinds_b), DEFAULT_SIGNAL_WEIGHTS))
        joint = engagement_score(event_for(kinds_a + kinds_b), DEFAULT_SIGNAL_WEIGHTS)
        assert joint == pytest.approx(split)


class TestTaxonomy:
    def test_meta_category_is_depth_one_ancestor(self):
        tax = Taxonomy({"root": None, "fashion": "root", "shoes": "fashion",
                        "running": "shoes"})
        assert tax.meta_category("running") == "fashion"
        assert tax.meta_category("shoes") == "fashion"
        assert tax.meta_category("fashion") == "fashion"

    def test_leaves(self):
        tax = Taxonomy({"root": None, "a": "root", "b": "a"})
        assert tax.leaves() == ["b"]
        assert not tax.is_leaf("a")

    def test_two_roots_rejected(self):
        with pytest.raises(ValidationError, match="exactly one root"):
            Taxonomy({"r1": None, "r2": None})

    def test_unknown_parent_rejected(self):
        with pytest.raises(ValidationError, match="unknown parent"):
            Taxonomy({"root": None, "a": "ghost"})

    def test_cycle_rejected(self):
        with pytest.raises(ValidationError, match="unreachable"):
            Taxonomy({"root": None, "a": "b", "b": "a"})


class TestSessionLog:
    def test_groups_and_orders(self):
        events = [make_event("s1", 1, "a b"), make_event("s2", 5, "c d"),
                  make_event("s1", 2, "a b c")]
        log = SessionLog.from_events(events)
        assert log.num_sessions == 2
        assert [e.ts for e in log.sessions["s1"]] == [1, 2]

    def test_non_increasing_ts_names_session(self):
        events = [make_event("sx", 5, "a"), make_event("sx", 3, "b")]
        with pytest.raises(ValidationError, match="sx"):
            SessionLog.from_events(events)

    def test_unknown_category_rejected_when_taxonomy_given(self):
        tax = Taxonomy({"root": None, "leaf": "root"})
        ok = make_event("s1", 1, "a", category="leaf")
        assert SessionLog.from_events([ok], taxonomy=tax).num_events == 1
        bad = make_event("s1", 1, "a", category="nope")
        with pytest.raises(ValidationError, match="nope"):
            SessionLog.from_events([bad], taxonomy=tax)

    def test_empty_query_rejected(self):
        with pytest.raises(ValidationError, match="empty"):
            SessionLog.from_events([make_event("s1", 1, "!!!")])


class TestLogIO:
    def _sample_log(self):
        return SessionLog.from_events([
            make_event("s1", 10, "Nike Air  Max", clicks=1),
            make_event("s1", 20, "nike air max 90", signals=(("itemX", "bought"),)),
            make_event("s2", 5, "café crème ☕"),
        ])

    def test_round_trip_identity(self, tmp_path):
        log = self._sample_log()
        path = tmp_path / "log.ndjson"
        write_log(log, path)
        assert load_log(path) == log

    def test_write_is_byte_deterministic(self, tmp_path):
        log = self._sample_log()
        p1, p2 = tmp_path / "a.ndjson", tmp_path / "b.ndjson"
        write_log(log, p1)
        write_log(log, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_missing_ts_field_reports_line(self, tmp_path):
        path = tmp_path / "bad.ndjson"
        lines = [
            json.dumps({"session_id": "s1", "ts": 1, "query": "ok", "category": "c",
                        "engagements": []}),
            json.dumps({"session_id": "s1", "query": "no ts", "category": "c",
                        "engagements": []}),
        ]
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(ValidationError, match="line 2") as excinfo:
            load_log(path)
        assert "ts" in str(excinfo.value)

    def test_malformed_json_reports_line_and_offset(self, tmp_path):
        path = tmp_path / "bad.ndjson"
        good = json.dumps({"session_id": "s1", "ts": 1, "query": "ok",
                           "category": "c", "engagements": []}) + "\n"
        path.write_text(good + "{not json\n")
        with pytest.raises(ValidationError) as excinfo:
            load_log(path)
        assert excinfo.value.line == 2
        assert excinfo.value.offset == len(good.encode())

    def test_out_of_order_ts_names_session(self, tmp_path):
        path = tmp_path / "bad.ndjson"
        rows = [{"session_id": "s9", "ts": 5, "query": "a", "category": "c",
                 "engagements": []},
                {"session_id": "s9", "ts": 3, "query": "b", "category": "c",
                 "engagements": []}]
        path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        with pytest.raises(ValidationError, match="s9"):
            load_log(path)
