from __future__ import annotations

from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qreform.errors import InputError
from qreform.rewritetype import RewriteType, classify, multiset_overlap, type_histogram

tokens_st = st.lists(st.sampled_from("abcdefg"), min_size=1, max_size=8)
maybe_empty_tokens_st = st.lists(st.sampled_from("abcdefg"), max_size=8)


def independent_rule_flags(src: list[str], pred: list[str]) -> dict[RewriteType, bool]:
    """Evaluate all eight defining predicates directly via Counter algebra.

    Deliberately separate from the implementation: each predicate is written
    out in full, so the test checks that exactly one fires and that it is the
    one `classify` returns.
    """
    s, p = Counter(src), Counter(pred)
    kept = s & p
    dropped = s - p
    added = p - s
    no_pred = sum(p.values()) == 0
    return {
        RewriteType.EMPTY: no_pred,
        RewriteType.SAME: not no_pred and not dropped and not added,
        RewriteType.SUPERSET: not no_pred and not dropped and bool(added),
        RewriteType.SUBSET: not no_pred and bool(dropped) and not added,
        RewriteType.REPLACE: (not no_pred and bool(dropped) and bool(added)
                              and bool(kept) and len(pred) == len(src)),
        RewriteType.SUBSET_REP: (not no_pred and bool(dropped) and bool(added)
                                 and bool(kept) and len(pred) < len(src)),
        RewriteType.SUPSET_REP: (not no_pred and bool(dropped) and bool(added)
                                 and bool(kept) and len(pred) > len(src)),
        RewriteType.OTHER: (not no_pred and bool(dropped) and bool(added)
                            and not kept),
    }


class TestClassify:
    def test_replace_on_jordan_pair(self):
        assert classify("nike air jordan 4".split(),
                        "nike air jordan 11".split()) == RewriteType.REPLACE

    def test_superset_on_air_max_pair(self):
        assert classify("nike womens size 9".split(),
                        "nike womens air max size 9".split()) == RewriteType.SUPERSET

    def test_empty(self):
        assert classify(["a", "b"], []) == RewriteType.EMPTY

    def test_other_on_disjoint(self):
        assert classify(["a", "b"], ["c", "d"]) == RewriteType.OTHER

    def test_same_ignores_word_order(self):
        assert classify("nike 9 womens size".split(),
                        "nike womens size 9".split()) == RewriteType.SAME

    def test_subset_and_compound_variants(self):
        assert classify(["a", "b", "c"], ["a", "b"]) == RewriteType.SUBSET
        assert classify(["a", "b", "c"], ["a", "x"]) == RewriteType.SUBSET_REP
        assert classify(["a", "b"], ["a", "x", "y"]) == RewriteType.SUPSET_REP

    def test_duplicate_tokens_count(self):
        # second "a" in the prediction is an addition under multiset semantics
        assert classify(["a", "b"], ["a", "a", "b"]) == RewriteType.SUPERSET
        assert classify(["a", "a", "b"], ["a", "b"]) == RewriteType.SUBSET

    def test_empty_source_is_an_error(self):
        with pytest.raises(InputError):
            classify([], ["a"])

    @given(tokens_st)
    def test_same_iff_self(self, src):
        assert classify(src, list(src)) == RewriteType.SAME

    @settings(max_examples=500)
    @given(tokens_st, maybe_empty_tokens_st)
    def test_exactly_one_rule_fires(self, src, pred):
        flags = independent_rule_flags(src, pred)
        firing = [rtype for rtype, on in flags.items() if on]
        assert len(firing) == 1
        assert classify(src, pred) == firing[0]

    @settings(max_examples=500)
    @given(tokens_st, tokens_st)
    def test_duality_under_argument_swap(self, src, pred):
        forward = classify(src, pred)
        backward = classify(pred, src)
        dual = {
            RewriteType.SAME: RewriteType.SAME,
            RewriteType.SUPERSET: RewriteType.SUBSET,
            RewriteType.SUBSET: RewriteType.SUPERSET,
            RewriteType.REPLACE: RewriteType.REPLACE,
            RewriteType.SUBSET_REP: RewriteType.SUPSET_REP,
            RewriteType.SUPSET_REP: RewriteType.SUBSET_REP,
            RewriteType.OTHER: RewriteType.OTHER,
        }
        assert backward == dual[forward]


class TestMultisetOverlap:
    def test_counts_with_multiplicity(self):
        assert multiset_overlap(["a", "a", "b"], ["a", "b", "b"]) == 2

    @given(maybe_empty_tokens_st, maybe_empty_tokens_st)
    def test_symmetric_and_bounded(self, a, b):
        overlap = multiset_overlap(a, b)
        assert overlap == multiset_overlap(b, a)
        assert 0 <= overlap <= min(len(a), len(b))


class TestTypeHistogram:
    def test_even_split(self):
        pairs = [(["a"], ["a"]), (["b"], ["b"]),
                 (["a", "b"], ["a"]), (["c", "d"], ["c"])]
        hist = type_histogram(pairs)
        assert hist == {RewriteType.SAME: 50.0, RewriteType.SUBSET: 50.0}

    def test_all_empty(self):
        hist = type_histogram([(["a"], []), (["b"], [])])
        assert hist == {RewriteType.EMPTY: 100.0}

    def test_empty_input_is_an_error(self):
        with pytest.raises(InputError):
            type_histogram([])

    @settings(max_examples=200)
    @given(st.lists(st.tuples(tokens_st, maybe_empty_tokens_st), min_size=1, max_size=30))
    def test_sums_to_hundred(self, pairs):
        assert sum(type_histogram(pairs).values()) == pytest.approx(100.0, abs=0.01)
