"""Evaluation suite: coverage, token P/R with per-type breakdown, BLEU,
ROUGE-L, rewrite-type agreement (rats), and type-frequency-weighted P/R (rtfw).

Predictions file format (tab-separated, one instance per line):

    source_query <TAB> gold_query <TAB> intent_tag <TAB> candidate_1 [<TAB> candidate_k ...]

An empty candidate string is a legal prediction meaning "no output".

Conventions, fixed here rather than tuned later:

* BLEU is corpus-level, n-grams up to 4, brevity penalty, add-one smoothing
  on orders with zero matches, orders with no candidate n-grams skipped
  (effective order). Identical corpora score exactly 100.0.
* ROUGE-L is the mean per-instance LCS F-measure with beta = 1.
* Top-k evaluation selects per metric family: token P/R, BLEU and ROUGE-L use
  the candidate with the best token F1 against gold (ties -> earliest); rats
  and coverage count an instance as a hit if any of the first k candidates
  qualifies. k = 1 reduces exactly to single-candidate evaluation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from qreform.corpus import normalize
from qreform.errors import InputError, ValidationError
from qreform.rewritetype import (RewriteType, TYPE_ORDER, classify,
                                 multiset_overlap, type_histogram)

Tokens = tuple[str, ...]

# Per-type columns shown in rendered tables, matching the usual shorthand.
DISPLAY_TYPES = (
    (RewriteType.SUBSET, "Sb"),
    (RewriteType.REPLACE, "Rp"),
    (RewriteType.SUPERSET, "Sp"),
    (RewriteType.SUBSET_REP, "SbRp"),
    (RewriteType.SUPSET_REP, "SpRp"),
)

_NONTRIVIAL_EXEMPT = (RewriteType.EMPTY, RewriteType.SAME)


@dataclass(frozen=True)
class EvalInstance:
    source: Tokens
    gold: Tokens
    candidates: tuple[Tokens, ...]
    gold_type: RewriteType
    intent_tag: str | None = None

    @classmethod
    def build(cls, source: Sequence[str], gold: Sequence[str],
              candidates: Sequence[Sequence[str]],
              intent_tag: str | None = None) -> "EvalInstance":
        if not source:
            raise InputError("instance source must be non-empty")
        if not gold:
            raise InputError("instance gold must be non-empty")
        if not candidates:
            raise InputError("instance must have at least one candidate")
        source_t = tuple(source)
        gold_t = tuple(gold)
        return cls(source_t, gold_t, tuple(tuple(c) for c in candidates),
                   classify(source_t, gold_t), intent_tag)


def token_recall(gold: Sequence[str], pred: Sequence[str]) -> float:
    """Fraction of gold tokens captured by the prediction (multiset overlap)."""
    if not gold:
        raise InputError("gold token list must be non-empty")
    return multiset_overlap(gold, pred) / len(gold)


def token_precision(gold: Sequence[str], pred: Sequence[str]) -> float:
    """Fraction of predicted tokens present in gold; 0.0 for an empty prediction."""
    if not gold:
        raise InputError("gold token list must be non-empty")
    if not pred:
        return 0.0
    return multiset_overlap(gold, pred) / len(pred)


def token_f1(gold: Sequence[str], pred: Sequence[str]) -> float:
    rec = token_recall(gold, pred)
    pre = token_precision(gold, pred)
    if rec + pre == 0.0:
        return 0.0
    return 2.0 * rec * pre / (rec + pre)


def _ngram_counts(tokens: Sequence[str], n: int) -> dict[tuple[str, ...], int]:
    counts: dict[tuple[str, ...], int] = {}
    for i in range(len(tokens) - n + 1):
        gram = tuple(tokens[i:i + n])
        counts[gram] = counts.get(gram, 0) + 1
    return counts


def bleu(corpus: Sequence[tuple[Sequence[str], Sequence[str]]],
         max_order: int = 4) -> float:
    """Corpus-level BLEU in [0, 100] over (gold, prediction) pairs."""
    if not corpus:
        raise InputError("cannot score an empty corpus")
    pred_len = sum(len(pred) for _, pred in corpus)
    ref_len = sum(len(gold) for gold, _ in corpus)
    if pred_len == 0:
        return 0.0
    log_sum = 0.0
    effective_orders = 0
    for n in range(1, max_order + 1):
        total = sum(max(0, len(pred) - n + 1) for _, pred in corpus)
        if total == 0:
            continue
        matches = 0
        for gold, pred in corpus:
            if len(pred) < n:
                continue
            ref_counts = _ngram_counts(gold, n)
            for gram, cnt in _ngram_counts(pred, n).items():
                matches += min(cnt, ref_counts.get(gram, 0))
        precision = matches / total if matches > 0 else 1.0 / (total + 1)
        log_sum += math.log(precision)
        effective_orders += 1
    if effective_orders == 0:
        return 0.0
    geo_mean = math.exp(log_sum / effective_orders)
    brevity = 1.0 if pred_len >= ref_len else math.exp(1.0 - ref_len / pred_len)
    return 100.0 * brevity * geo_mean


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for tok_a in a:
        cur = [0]
        for j, tok_b in enumerate(b, start=1):
            if tok_a == tok_b:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(corpus: Sequence[tuple[Sequence[str], Sequence[str]]]) -> float:
    """Mean per-instance LCS F-measure (beta = 1) in [0, 1]."""
    if not corpus:
        raise InputError("cannot score an empty corpus")
    total = 0.0
    for gold, pred in corpus:
        lcs = _lcs_length(gold, pred)
        if lcs == 0:
            continue
        precision = lcs / len(pred)
        recall = lcs / len(gold)
        total += 2.0 * precision * recall / (precision + recall)
    return total / len(corpus)


def _require_instances(instances: Sequence[EvalInstance]) -> None:
    if not instances:
        raise InputError("instance list must be non-empty")


def coverage(instances: Sequence[EvalInstance]) -> float:
    """Fraction of instances whose prediction is a non-trivial rewrite
    (not Empty, not Same). Single-candidate semantics."""
    _require_instances(instances)
    hits = sum(1 for inst in instances
               if classify(inst.source, inst.candidates[0]) not in _NONTRIVIAL_EXEMPT)
    return hits / len(instances)


def rats(instances: Sequence[EvalInstance]) -> float:
    """Rewrite-type agreement: fraction of instances where the prediction's
    rewrite type equals the gold rewrite type."""
    _require_instances(instances)
    hits = sum(1 for inst in instances
               if classify(inst.source, inst.candidates[0]) == inst.gold_type)
    return hits / len(instances)


def per_type_breakdown(
        instances: Sequence[EvalInstance],
) -> dict[RewriteType, tuple[float, float]]:
    """Mean (recall, precision) grouped by gold rewrite type.

    Keys are exactly the gold types observed in the instance set; absent
    types are omitted, never zero-filled.
    """
    _require_instances(instances)
    sums: dict[RewriteType, list[float]] = {}
    for inst in instances:
        pred = inst.candidates[0]
        entry = sums.setdefault(inst.gold_type, [0.0, 0.0, 0.0])
        entry[0] += token_recall(inst.gold, pred)
        entry[1] += token_precision(inst.gold, pred)
        entry[2] += 1.0
    return {rtype: (rec_sum / count, pre_sum / count)
            for rtype, (rec_sum, pre_sum, count) in sums.items()}


def rtfw(instances: Sequence[EvalInstance]) -> tuple[float, float]:
    """Recall/precision re-weighted by the gold rewrite-type frequencies.

    Weights f_t are test-set frequencies over observed gold types (summing
    to 1), applied to the per-type macro means.
    """
    _require_instances(instances)
    breakdown = per_type_breakdown(instances)
    freq: dict[RewriteType, int] = {}
    for inst in instances:
        freq[inst.gold_type] = freq.get(inst.gold_type, 0) + 1
    n = len(instances)
    rtfw_rec = sum((freq[t] / n) * rec for t, (rec, _) in breakdown.items())
    rtfw_pre = sum((freq[t] / n) * pre for t, (_, pre) in breakdown.items())
    return rtfw_rec, rtfw_pre


@dataclass(frozen=True)
class EvalReport:
    model: str
    n: int
    k: int
    cov: float
    rec: float
    pre: float
    bleu: float
    rouge_l: float
    rats: float
    rtfw_rec: float
    rtfw_pre: float
    rec_by_type: dict[RewriteType, float]
    pre_by_type: dict[RewriteType, float]
    pred_histogram: dict[RewriteType, float]
    gold_histogram: dict[RewriteType, float]

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "n": self.n,
            "k": self.k,
            "cov": self.cov,
            "rec": self.rec,
            "pre": self.pre,
            "bleu": self.bleu,
            "rouge_l": self.rouge_l,
            "rats": self.rats,
            "rtfw_rec": self.rtfw_rec,
            "rtfw_pre": self.rtfw_pre,
            "rec_by_type": {t.value: v for t, v in self.rec_by_type.items()},
            "pre_by_type": {t.value: v for t, v in self.pre_by_type.items()},
            "pred_histogram": {t.value: v for t, v in self.pred_histogram.items()},
            "gold_histogram": {t.value: v for t, v in self.gold_histogram.items()},
        }


def _select_best(inst: EvalInstance, k: int) -> Tokens:
    cands = inst.candidates[:k]
    best = cands[0]
    best_f1 = token_f1(inst.gold, best)
    for cand in cands[1:]:
        f1 = token_f1(inst.gold, cand)
        if f1 > best_f1:
            best, best_f1 = cand, f1
    return best


def evaluate_at_k(instances: Sequence[EvalInstance], k: int,
                  model: str = "model") -> EvalReport:
    """Score a model's top-k candidates; k beyond the candidate count uses all."""
    _require_instances(instances)
    if k < 1:
        raise InputError(f"k must be >= 1, got {k}")
    selected = [_select_best(inst, k) for inst in instances]
    reduced = [EvalInstance(inst.source, inst.gold, (sel,), inst.gold_type,
                            inst.intent_tag)
               for inst, sel in zip(instances, selected)]

    cov_hits = 0
    rats_hits = 0
    for inst in instances:
        types = [classify(inst.source, cand) for cand in inst.candidates[:k]]
        if any(t not in _NONTRIVIAL_EXEMPT for t in types):
            cov_hits += 1
        if any(t == inst.gold_type for t in types):
            rats_hits += 1

    n = len(instances)
    pairs = [(inst.gold, sel) for inst, sel in zip(instances, selected)]
    breakdown = per_type_breakdown(reduced)
    rtfw_rec, rtfw_pre = rtfw(reduced)
    return EvalReport(
        model=model,
        n=n,
        k=k,
        cov=cov_hits / n,
        rec=sum(token_recall(g, p) for g, p in pairs) / n,
        pre=sum(token_precision(g, p) for g, p in pairs) / n,
        bleu=bleu(pairs),
        rouge_l=rouge_l(pairs),
        rats=rats_hits / n,
        rtfw_rec=rtfw_rec,
        rtfw_pre=rtfw_pre,
        rec_by_type={t: rec for t, (rec, _) in sorted(breakdown.items(),
                                                      key=lambda kv: kv[0].value)},
        pre_by_type={t: pre for t, (_, pre) in sorted(breakdown.items(),
                                                      key=lambda kv: kv[0].value)},
        pred_histogram=type_histogram([(inst.source, sel)
                                       for inst, sel in zip(instances, selected)]),
        gold_histogram=type_histogram([(inst.source, inst.gold)
                                       for inst in instances]),
    )


def evaluate(instances: Sequence[EvalInstance], model: str = "model") -> EvalReport:
    """Single-candidate evaluation; identical to ``evaluate_at_k(..., k=1)``."""
    return evaluate_at_k(instances, 1, model=model)


def write_predictions(rows: Iterable[tuple[str, str, str, Sequence[str]]],
                      path: str | Path) -> None:
    """Rows are (source_query, gold_query, intent_tag, candidate strings)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for source, gold, tag, candidates in rows:
            fh.write("\t".join((source, gold, tag, *candidates)))
            fh.write("\n")


def load_predictions(path: str | Path) -> list[EvalInstance]:
    instances = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            columns = line.split("\t")
            if len(columns) < 4:
                raise ValidationError(
                    "expected source, gold, tag and at least one candidate "
                    f"column, got {len(columns)}", line=lineno)
            source, gold, tag = columns[0], columns[1], columns[2]
            source_tokens = normalize(source)
            gold_tokens = normalize(gold)
            if not source_tokens:
                raise ValidationError(f"empty source query {source!r}", line=lineno)
            if not gold_tokens:
                raise ValidationError(f"empty gold query {gold!r}", line=lineno)
            candidates = [tuple(normalize(c)) for c in columns[3:]]
            instances.append(EvalInstance.build(source_tokens, gold_tokens,
                                                candidates, intent_tag=tag or None))
    return instances


def _fmt_hist_row(label: str, hist: dict[RewriteType, float]) -> str:
    cells = [f"{hist.get(rtype, 0.0):>10.2f}" for rtype in TYPE_ORDER]
    return f"{label:<14}" + "".join(cells)


def _fmt_by_type(by_type: dict[RewriteType, float]) -> str:
    cells = []
    for rtype, _short in DISPLAY_TYPES:
        cells.append(f"{by_type[rtype]:.2f}" if rtype in by_type else "-")
    return "(" + ", ".join(cells) + ")"


def render_reports(reports: Sequence[EvalReport]) -> str:
    """Human-readable tables: rewrite-type frequencies, then the metric suite."""
    lines = ["rewrite-type frequency (%)"]
    header = f"{'model':<14}" + "".join(f"{t.value:>10}" for t in TYPE_ORDER)
    lines.append(header)
    if reports:
        lines.append(_fmt_hist_row("test-data", reports[0].gold_histogram))
    for report in reports:
        lines.append(_fmt_hist_row(report.model, report.pred_histogram))
    lines.append("")
    lines.append("metrics  (per-type order: "
                 + ", ".join(short for _, short in DISPLAY_TYPES) + ")")
    lines.append(f"{'model':<14}{'n':>6}{'k':>3}{'cov':>7}{'rec':>7}"
                 f"{'pre':>7}{'bleu':>8}{'rougeL':>8}{'rats':>7}"
                 f"{'rtfw_rec':>10}{'rtfw_pre':>10}  rec/pre by type")
    for r in reports:
        lines.append(
            f"{r.model:<14}{r.n:>6}{r.k:>3}{r.cov:>7.2f}{r.rec:>7.2f}"
            f"{r.pre:>7.2f}{r.bleu:>8.2f}{r.rouge_l:>8.2f}{r.rats:>7.2f}"
            f"{r.rtfw_rec:>10.2f}{r.rtfw_pre:>10.2f}  "
            f"rec {_fmt_by_type(r.rec_by_type)} pre {_fmt_by_type(r.pre_by_type)}")
    return "\n".join(lines) + "\n"


def write_reports(reports: Sequence[EvalReport], path: str | Path) -> None:
    doc = {"reports": [report.to_dict() for report in reports]}
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
