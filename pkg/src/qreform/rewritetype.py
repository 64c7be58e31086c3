"""Eight-way structural classification of (source, prediction) token pairs.

Comparison is multiset-based: word order is ignored, duplicate tokens count.
Order-sensitive comparison is available through BLEU / ROUGE-L in the metrics
module instead.
"""

from __future__ import annotations

from enum import Enum
from typing import Sequence

from qreform.errors import InputError


class RewriteType(Enum):
    EMPTY = "Empty"
    SAME = "Same"
    SUPERSET = "SuperSet"
    SUBSET = "SubSet"
    REPLACE = "Replace"
    SUBSET_REP = "SubSetRep"
    SUPSET_REP = "SupSetRep"
    OTHER = "Other"


# Column order used by reports and rendered tables.
TYPE_ORDER = (
    RewriteType.EMPTY,
    RewriteType.SAME,
    RewriteType.SUPERSET,
    RewriteType.SUBSET,
    RewriteType.REPLACE,
    RewriteType.SUBSET_REP,
    RewriteType.SUPSET_REP,
    RewriteType.OTHER,
)


def classify(src_tokens: Sequence[str], pred_tokens: Sequence[str]) -> RewriteType:
    """Classify a prediction against its source query.

    With S/P the token multisets, kept = S ∩ P, dropped = S \\ P,
    added = P \\ S:

    * Empty      — P empty
    * Same       — nothing dropped, nothing added
    * SuperSet   — only additions
    * SubSet     — only deletions
    * Replace    — substitutions at equal length (kept, dropped, added all
                   non-empty, |P| = |S|)
    * SubSetRep  — substitutions plus net shrink (|P| < |S|)
    * SupSetRep  — substitutions plus net growth (|P| > |S|)
    * Other      — fully disjoint rewrite (kept empty, both diffs non-empty)

    Exactly one case applies to every pair; the source must be non-empty.
    """
    if not src_tokens:
        raise InputError("source token list must be non-empty")
    if not pred_tokens:
        return RewriteType.EMPTY
    src_counts: dict[str, int] = {}
    for tok in src_tokens:
        src_counts[tok] = src_counts.get(tok, 0) + 1
    pred_counts: dict[str, int] = {}
    for tok in pred_tokens:
        pred_counts[tok] = pred_counts.get(tok, 0) + 1
    kept = 0
    added = 0
    for tok, cnt in pred_counts.items():
        in_src = src_counts.get(tok, 0)
        kept += cnt if cnt <= in_src else in_src
        if cnt > in_src:
            added += cnt - in_src
    dropped = len(src_tokens) - kept
    if not dropped and not added:
        return RewriteType.SAME
    if not dropped:
        return RewriteType.SUPERSET
    if not added:
        return RewriteType.SUBSET
    if not kept:
        return RewriteType.OTHER
    if len(pred_tokens) == len(src_tokens):
        return RewriteType.REPLACE
    if len(pred_tokens) < len(src_tokens):
        return RewriteType.SUBSET_REP
    return RewriteType.SUPSET_REP


def multiset_overlap(a: Sequence[str], b: Sequence[str]) -> int:
    """Size of the multiset intersection |A ∩ B|."""
    counts: dict[str, int] = {}
    for tok in a:
        counts[tok] = counts.get(tok, 0) + 1
    overlap = 0
    for tok in b:
        remaining = counts.get(tok, 0)
        if remaining > 0:
            counts[tok] = remaining - 1
            overlap += 1
    return overlap


def type_histogram(
    pairs: Sequence[tuple[Sequence[str], Sequence[str]]],
) -> dict[RewriteType, float]:
    """Frequency (percent) of each rewrite type over (source, prediction) pairs.

    Only observed types appear as keys; values sum to 100 up to float rounding.
    """
    if not pairs:
        raise InputError("cannot build a histogram from zero pairs")
    counts: dict[RewriteType, int] = {}
    for src, pred in pairs:
        rtype = classify(src, pred)
        counts[rtype] = counts.get(rtype, 0) + 1
    n = len(pairs)
    return {rtype: 100.0 * cnt / n for rtype, cnt in counts.items()}
