"""Post-filtering mined pairs into intent buckets and exporting training data.

The bucket cascade (first match wins):

1. SameIntent     — same leaf category, high token Jaccard, compatible length.
2. SimilarIntent  — same leaf or meta category, and either the tagged aspect
                    sets differ while the residual tokens still agree, or the
                    token Jaccard sits in the mid band.
3. InspiredIntent — one-hop provenance, or low token Jaccard with at least
                    some lexical or retrieval overlap left as pivot evidence.

Pairs with zero token overlap *and* zero recall-set overlap (and no one-hop
provenance) are rejected as noise rather than labeled Inspired.

A production deployment would use an NER model for aspect extraction; this
module ships a deterministic pattern-lexicon tagger instead. Patterns are
token sequences where ``<number>`` matches an all-digit token, e.g.
``"size <number>"`` or ``"air max"``, applied under a declared priority
order so each token belongs to at most one aspect.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from qreform.corpus import Taxonomy, normalize
from qreform.errors import ConfigError, InputError, ValidationError
from qreform.miner import Provenance, QueryPair


class IntentBucket(Enum):
    SAME = "same"
    SIMILAR = "similar"
    INSPIRED = "inspired"

    @property
    def tag(self) -> str:
        return f"<{self.value}>"


_TAG_TO_BUCKET = {bucket.tag: bucket for bucket in IntentBucket}


@dataclass(frozen=True)
class AspectPattern:
    units: tuple[str, ...]

    def matches_at(self, tokens: Sequence[str], start: int) -> bool:
        for offset, unit in enumerate(self.units):
            tok = tokens[start + offset]
            if unit == "<number>":
                if not tok.isdigit():
                    return False
            elif tok != unit:
                return False
        return True


class AspectLexicon:
    """Aspect name -> value patterns, applied under an explicit priority order."""

    def __init__(self, aspects: dict[str, list[str]], priority: list[str] | None = None):
        self.priority = list(priority) if priority is not None else sorted(aspects)
        if set(self.priority) != set(aspects):
            raise ConfigError("lexicon priority must list every aspect exactly once")
        self.patterns: dict[str, list[AspectPattern]] = {}
        for aspect, patterns in aspects.items():
            parsed = [AspectPattern(tuple(p.split())) for p in patterns]
            if any(not pat.units for pat in parsed):
                raise ConfigError(f"aspect {aspect!r} has an empty pattern")
            self.patterns[aspect] = parsed

    @classmethod
    def from_dict(cls, data: dict) -> "AspectLexicon":
        return cls(data["aspects"], data.get("priority"))

    @classmethod
    def load(cls, path: str | Path) -> "AspectLexicon":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def tag_aspects(tokens: Sequence[str],
                lexicon: AspectLexicon) -> tuple[dict[str, list[str]], list[str]]:
    """Assign tokens to aspects; returns (aspect -> matched tokens, residual).

    Every token lands in at most one aspect; matched plus residual tokens
    partition the input. Deterministic: aspects in priority order, patterns in
    declared order, positions left to right.
    """
    consumed = [False] * len(tokens)
    found: dict[str, list[str]] = {}
    for aspect in lexicon.priority:
        for pattern in lexicon.patterns[aspect]:
            width = len(pattern.units)
            pos = 0
            while pos + width <= len(tokens):
                window_free = not any(consumed[pos:pos + width])
                if window_free and pattern.matches_at(tokens, pos):
                    for k in range(pos, pos + width):
                        consumed[k] = True
                    found.setdefault(aspect, []).extend(tokens[pos:pos + width])
                    pos += width
                else:
                    pos += 1
    residual = [tok for tok, used in zip(tokens, consumed) if not used]
    return found, residual


@dataclass(frozen=True)
class InventoryItem:
    item_id: str
    category_id: str
    tokens: tuple[str, ...]


class RetrievalIndex:
    """Inverted index over a synthetic inventory; deterministic top-K recall."""

    def __init__(self, items: Iterable[InventoryItem]):
        self.items = {item.item_id: item for item in items}
        self.postings: dict[str, set[str]] = {}
        for item in self.items.values():
            for tok in set(item.tokens):
                self.postings.setdefault(tok, set()).add(item.item_id)

    @classmethod
    def from_dict(cls, data: dict) -> "RetrievalIndex":
        return cls(InventoryItem(entry["id"], entry["category"],
                                 tuple(normalize(entry["title"])))
                   for entry in data["items"])

    @classmethod
    def load(cls, path: str | Path) -> "RetrievalIndex":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def recall_set(self, tokens: Sequence[str], k: int) -> list[str]:
        """Top-k item ids by distinct matched tokens, ties broken by item id."""
        if k < 1:
            raise InputError(f"recall K must be >= 1, got {k}")
        scores: dict[str, int] = {}
        for tok in set(tokens):
            for item_id in self.postings.get(tok, ()):
                scores[item_id] = scores.get(item_id, 0) + 1
        ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
        return [item_id for item_id, _ in ranked[:k]]


def recall_similarity(src_tokens: Sequence[str], tgt_tokens: Sequence[str],
                      index: RetrievalIndex, k: int) -> float:
    """Jaccard overlap of the two top-k recall sets; 0.0 when both are empty."""
    src_set = set(index.recall_set(src_tokens, k))
    tgt_set = set(index.recall_set(tgt_tokens, k))
    if not src_set and not tgt_set:
        return 0.0
    return len(src_set & tgt_set) / len(src_set | tgt_set)


def token_jaccard(a: Sequence[str], b: Sequence[str]) -> float:
    sa, sb = set(a), set(b)
    if not sa and not sb:
        return 0.0
    return len(sa & sb) / len(sa | sb)


@dataclass(frozen=True)
class IntentThresholds:
    tau_same: float = 0.6
    tau_sim: float = 0.2
    tau_core: float = 0.5
    delta_len: int = 1
    recall_k: int = 50

    def __post_init__(self) -> None:
        if not (0.0 < self.tau_same <= 1.0):
            raise ConfigError(f"tau_same must be in (0, 1], got {self.tau_same}")
        if not (0.0 < self.tau_sim <= self.tau_same):
            raise ConfigError(
                f"tau_sim must be in (0, tau_same], got {self.tau_sim}")
        if not (0.0 < self.tau_core <= 1.0):
            raise ConfigError(f"tau_core must be in (0, 1], got {self.tau_core}")
        if self.delta_len < 0:
            raise ConfigError(f"delta_len must be >= 0, got {self.delta_len}")
        if self.recall_k < 1:
            raise ConfigError(f"recall_k must be >= 1, got {self.recall_k}")


@dataclass(frozen=True)
class IntentContext:
    taxonomy: Taxonomy
    lexicon: AspectLexicon
    index: RetrievalIndex
    thresholds: IntentThresholds
    query_categories: dict[str, str]

    def category_of(self, query: str) -> str:
        try:
            category = self.query_categories[query]
        except KeyError:
            raise ValidationError(f"no category known for query {query!r}")
        if category not in self.taxonomy:
            raise ValidationError(f"unknown category {category!r} for query {query!r}")
        return category


def query_categories_from_log(log) -> dict[str, str]:
    """Majority category per normalized query; ties broken lexicographically."""
    counts: dict[str, dict[str, int]] = {}
    for event in log.events():
        per_query = counts.setdefault(event.query, {})
        per_query[event.category_id] = per_query.get(event.category_id, 0) + 1
    return {
        query: min(per_query, key=lambda cat: (-per_query[cat], cat))
        for query, per_query in counts.items()
    }


def assign_bucket(pair: QueryPair,
                  ctx: IntentContext) -> tuple[IntentBucket | None, str | None]:
    """Route a mined pair through the cascade; returns (bucket, None) or
    (None, rejection reason). Pure function of (pair, ctx)."""
    t = ctx.thresholds
    src, tgt = pair.source_tokens, pair.target_tokens
    src_cat = ctx.category_of(pair.source_query)
    tgt_cat = ctx.category_of(pair.target_query)
    jac = token_jaccard(src, tgt)
    same_leaf = src_cat == tgt_cat
    same_meta = (ctx.taxonomy.meta_category(src_cat)
                 == ctx.taxonomy.meta_category(tgt_cat))
    one_hop = pair.provenance is Provenance.CROSS_SESSION_ONEHOP

    # rule 1: high-similarity pairs within one leaf category
    if same_leaf and jac >= t.tau_same and abs(len(src) - len(tgt)) <= t.delta_len:
        return IntentBucket.SAME, None

    # rule 2: specificity change within the same leaf or department
    if same_leaf or same_meta:
        src_aspects, src_residual = tag_aspects(src, ctx.lexicon)
        tgt_aspects, tgt_residual = tag_aspects(tgt, ctx.lexicon)
        if src_aspects != tgt_aspects and \
                token_jaccard(src_residual, tgt_residual) >= t.tau_core:
            return IntentBucket.SIMILAR, None
        if t.tau_sim <= jac < t.tau_same:
            return IntentBucket.SIMILAR, None

    # rule 3: pivots — one-hop pairs directly, otherwise low-similarity pairs
    # that keep at least some lexical or retrieval overlap
    if one_hop:
        return IntentBucket.INSPIRED, None
    if jac < t.tau_sim:
        if jac == 0.0 and recall_similarity(src, tgt, ctx.index, t.recall_k) == 0.0:
            return None, ("rule3: zero token and recall-set overlap, "
                          "no pivot evidence")
        return IntentBucket.INSPIRED, None

    # rejected: report the first rule-1 constraint that failed
    if not same_leaf:
        return None, "rule1: source and target leaf categories differ"
    if jac < t.tau_same:
        return None, f"rule1: token jaccard {jac:.3f} below tau_same"
    return None, (f"rule1: length difference {abs(len(src) - len(tgt))} "
                  f"exceeds delta_len")


def bucketize(pairs: Iterable[QueryPair],
              ctx: IntentContext) -> tuple[list[QueryPair], list[tuple[QueryPair, str]]]:
    accepted, rejected = [], []
    for pair in pairs:
        bucket, reason = assign_bucket(pair, ctx)
        if bucket is not None:
            accepted.append(pair.with_bucket(bucket))
        else:
            rejected.append((pair, reason or "unspecified"))
    return accepted, rejected


_BUCKET_ORDER = {IntentBucket.SAME: 0, IntentBucket.SIMILAR: 1, IntentBucket.INSPIRED: 2}


def export_dataset(pairs: Iterable[QueryPair], path: str | Path) -> dict[str, int]:
    """Write intent-tagged training lines: ``<tag>\\tsource\\ttarget``.

    Lines are deduplicated and sorted by (bucket, source, target), so
    re-export of the same input is byte-identical. A sibling
    ``<path>.manifest.json`` records per-bucket counts.
    """
    rows = set()
    for pair in pairs:
        if pair.bucket is None:
            raise InputError(
                f"pair ({pair.source_query!r} -> {pair.target_query!r}) has no bucket")
        rows.add((pair.bucket, pair.source_query, pair.target_query))
    ordered = sorted(rows, key=lambda row: (_BUCKET_ORDER[row[0]], row[1], row[2]))
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for bucket, source, target in ordered:
            fh.write(f"{bucket.tag}\t{source}\t{target}\n")
    counts = {bucket.value: 0 for bucket in IntentBucket}
    for bucket, _, _ in ordered:
        counts[bucket.value] += 1
    counts["total"] = len(ordered)
    manifest_path = path.with_name(path.name + ".manifest.json")
    with open(manifest_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(counts, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return counts


def read_dataset(path: str | Path) -> list[tuple[IntentBucket, str, str]]:
    """Parse an exported dataset file back into (bucket, source, target) rows."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            columns = line.split("\t")
            if len(columns) != 3:
                raise ValidationError(
                    f"expected 3 tab-separated columns, got {len(columns)}", line=lineno)
            tag, source, target = columns
            if tag not in _TAG_TO_BUCKET:
                raise ValidationError(f"unknown intent tag {tag!r}", line=lineno)
            if not source.strip() or not target.strip():
                raise ValidationError("empty source or target query", line=lineno)
            rows.append((_TAG_TO_BUCKET[tag], source, target))
    return rows


def write_bucketed(pairs: Iterable[QueryPair], path: str | Path) -> None:
    """Bucketed-pairs file: ``tag<TAB>provenance<TAB>source<TAB>target<TAB>evidence``."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for pair in pairs:
            if pair.bucket is None:
                raise InputError("cannot write an unbucketed pair")
            fh.write("\t".join((pair.bucket.tag, pair.provenance.value,
                                pair.source_query, pair.target_query,
                                ";".join(pair.evidence.fields()))))
            fh.write("\n")


def read_bucketed(path: str | Path) -> list[QueryPair]:
    from qreform.miner import _EVIDENCE_PARSERS  # shared column conventions

    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            columns = line.split("\t")
            if len(columns) != 5:
                raise ValidationError(
                    f"expected 5 tab-separated columns, got {len(columns)}", line=lineno)
            tag, prov_name, source, target, evidence_raw = columns
            if tag not in _TAG_TO_BUCKET:
                raise ValidationError(f"unknown intent tag {tag!r}", line=lineno)
            try:
                provenance = Provenance(prov_name)
            except ValueError:
                raise ValidationError(f"unknown provenance {prov_name!r}", line=lineno)
            fields = evidence_raw.split(";") if evidence_raw else []
            try:
                evidence = _EVIDENCE_PARSERS[provenance](fields)
            except (ValueError, IndexError) as exc:
                raise ValidationError(f"bad evidence {evidence_raw!r}: {exc}", line=lineno)
            pairs.append(QueryPair.build(source, target, provenance,
                                         evidence).with_bucket(_TAG_TO_BUCKET[tag]))
    return pairs
