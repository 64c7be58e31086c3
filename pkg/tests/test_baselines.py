from __future__ import annotations

from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qreform.baselines import (BaselineConfig, identity_rewrite, run_baseline,
                               theta_r)
from qreform.errors import ConfigError, ValidationError
from qreform.metrics import bleu, coverage, load_predictions
from qreform.rewritetype import RewriteType, classify, type_histogram

CFG = BaselineConfig(kind="random_drop", seed=0)


def is_subsequence(sub: list[str], full: list[str]) -> bool:
    it = iter(full)
    return all(tok in it for tok in sub)


class TestConfig:
    def test_validates_fraction(self):
        with pytest.raises(ConfigError):
            BaselineConfig(max_drop_fraction=1.0)
        with pytest.raises(ConfigError):
            BaselineConfig(max_drop_fraction=0.0)

    def test_validates_min_tokens(self):
        with pytest.raises(ConfigError):
            BaselineConfig(min_tokens_to_drop_from=1)

    def test_validates_kind(self):
        with pytest.raises(ConfigError):
            BaselineConfig(kind="teleport")


class TestThetaR:
    def test_short_query_unchanged(self):
        assert theta_r(["a", "b", "c"], CFG, 0) == ["a", "b", "c"]
        assert theta_r(["a"], CFG, 7) == ["a"]

    def test_four_tokens_enumerates_legal_outcomes(self):
        src = ["a", "b", "c", "d"]
        legal = set()
        for d in (1, 2):
            for dropped in combinations(range(4), d):
                legal.add(tuple(t for i, t in enumerate(src) if i not in dropped))
        seen = set()
        for index in range(400):
            out = tuple(theta_r(src, CFG, index))
            assert out in legal
            seen.add(out)
        assert seen == legal  # every outcome reachable

    def test_deterministic_per_seed_and_index(self):
        src = ["a", "b", "c", "d", "e"]
        assert theta_r(src, CFG, 3) == theta_r(src, CFG, 3)
        cfg2 = BaselineConfig(kind="random_drop", seed=1)
        outs = {tuple(theta_r(src, cfg2, i)) for i in range(50)}
        assert len(outs) > 1  # indices actually vary the stream

    @settings(max_examples=300)
    @given(st.lists(st.sampled_from("abcdefgh"), min_size=1, max_size=10),
           st.integers(min_value=0, max_value=1000))
    def test_never_empty_never_adds_never_reorders(self, src, index):
        out = theta_r(src, CFG, index)
        assert out
        assert is_subsequence(out, src)
        assert classify(src, out) in (RewriteType.SAME, RewriteType.SUBSET)

    @settings(max_examples=300)
    @given(st.lists(st.sampled_from("abcdefgh"), min_size=4, max_size=10),
           st.integers(min_value=0, max_value=1000))
    def test_eligible_queries_always_drop(self, src, index):
        out = theta_r(src, CFG, index)
        assert len(out) < len(src)
        assert classify(src, out) is RewriteType.SUBSET

    def test_small_fraction_still_drops_one(self):
        cfg = BaselineConfig(kind="random_drop", seed=0, max_drop_fraction=0.1)
        out = theta_r(["a", "b", "c", "d"], cfg, 0)
        assert len(out) == 3


class TestIdentity:
    def test_returns_source(self):
        assert identity_rewrite(["x"]) == ["x"]

    def test_identity_coverage_zero_and_bleu_below_gold(self):
        from qreform.metrics import EvalInstance
        instances = [
            EvalInstance.build(["a", "b", "c"], ["a", "b"], [["a", "b", "c"]]),
            EvalInstance.build(["x", "y"], ["x", "z"], [["x", "y"]]),
        ]
        assert coverage(instances) == 0.0
        identity_bleu = bleu([(i.gold, i.candidates[0]) for i in instances])
        gold_bleu = bleu([(i.gold, i.gold) for i in instances])
        assert identity_bleu < gold_bleu == 100.0


class TestRunBaseline:
    def _write_dataset(self, path, rows):
        path.write_text("".join(f"{tag}\t{src}\t{tgt}\n" for tag, src, tgt in rows))

    def test_empty_dataset(self, tmp_path):
        dataset = tmp_path / "data.tsv"
        dataset.write_text("")
        out = tmp_path / "preds.tsv"
        assert run_baseline(dataset, CFG, out) == 0
        assert out.read_text() == ""

    def test_reproducible_bytes(self, tmp_path):
        dataset = tmp_path / "data.tsv"
        self._write_dataset(dataset, [
            ("<same>", "red running shoes mens size 10", "red shoes"),
            ("<similar>", "usb cable braided long", "usb cable"),
            ("<inspired>", "phone case", "trail shoes"),
        ])
        p1, p2 = tmp_path / "p1.tsv", tmp_path / "p2.tsv"
        run_baseline(dataset, CFG, p1)
        run_baseline(dataset, CFG, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_line_count_and_order_preserved(self, tmp_path):
        dataset = tmp_path / "data.tsv"
        rows = [("<same>", f"alpha beta gamma delta {i}", "alpha beta")
                for i in range(20)]
        self._write_dataset(dataset, rows)
        out = tmp_path / "preds.tsv"
        assert run_baseline(dataset, CFG, out) == 20
        lines = out.read_text().splitlines()
        assert len(lines) == 20
        for i, line in enumerate(lines):
            src = line.split("\t")[0]
            assert src == f"alpha beta gamma delta {i}"

    def test_histogram_masses_match_length_mix_exactly(self, tmp_path):
        # 30 short (3-token) + 70 eligible (>=4 tokens): Same mass must be
        # exactly 30%, SubSet exactly 70% (eligible queries always drop >= 1)
        dataset = tmp_path / "data.tsv"
        rows = []
        for i in range(30):
            rows.append(("<same>", f"a{i} b{i} c{i}", "gold query"))
        for i in range(70):
            rows.append(("<same>", f"a{i} b{i} c{i} d{i} e{i}", "gold query"))
        self._write_dataset(dataset, rows)
        out = tmp_path / "preds.tsv"
        run_baseline(dataset, CFG, out)
        instances = load_predictions(out)
        hist = type_histogram([(i.source, i.candidates[0]) for i in instances])
        assert hist == {RewriteType.SAME: 30.0, RewriteType.SUBSET: 70.0}

    def test_identity_kind(self, tmp_path):
        dataset = tmp_path / "data.tsv"
        self._write_dataset(dataset, [("<same>", "red shoes mens", "red shoes")])
        out = tmp_path / "preds.tsv"
        run_baseline(dataset, BaselineConfig(kind="identity"), out)
        assert out.read_text() == "red shoes mens\tred shoes\t<same>\tred shoes mens\n"

    def test_malformed_line_reports_number(self, tmp_path):
        dataset = tmp_path / "data.tsv"
        dataset.write_text("<same>\ta b\tc d\nbroken line\n")
        with pytest.raises(ValidationError, match="line 2"):
            run_baseline(dataset, CFG, tmp_path / "preds.tsv")


class TestCoverageContract:
    def test_coverage_equals_eligible_fraction(self, tmp_path):
        # 4 of 10 sources have >= 4 tokens
        dataset = tmp_path / "data.tsv"
        rows = []
        for i in range(4):
            rows.append(("<same>", f"w{i} x{i} y{i} z{i}", "gold"))
        for i in range(6):
            rows.append(("<same>", f"w{i} x{i}", "gold"))
        dataset.write_text("".join(f"{t}\t{s}\t{g}\n" for t, s, g in rows))
        out = tmp_path / "preds.tsv"
        run_baseline(dataset, CFG, out)
        instances = load_predictions(out)
        assert coverage(instances) == 4 / 10
