"""Mining reformulation pairs from a session log.

Three strategies, each with its own provenance tag and evidence record:

* in-session — source and target observed in the same session, target engaged;
* cross-session co-engaged — two queries from different sessions sharing
  engaged items;
* cross-session one-hop — two queries with no shared items at all, connected
  only through a bridge query that co-engages items with both sides.

The mined-pairs file is tab-separated, one pair per line:
``provenance<TAB>source<TAB>target<TAB>evidence`` with evidence fields
semicolon-joined, written in the deterministic order defined per miner.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from itertools import combinations
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Union

from qreform.corpus import DEFAULT_SIGNAL_WEIGHTS, CLICK, SessionLog, engagement_score, normalize
from qreform.errors import ConfigError, ValidationError

if TYPE_CHECKING:
    from qreform.intents import IntentBucket


class Provenance(Enum):
    IN_SESSION = "in_session"
    CROSS_SESSION_COENGAGED = "cross_session_coengaged"
    CROSS_SESSION_ONEHOP = "cross_session_onehop"


@dataclass(frozen=True)
class InSessionEvidence:
    session_id: str
    hops: int

    def fields(self) -> tuple[str, ...]:
        return (self.session_id, str(self.hops))


@dataclass(frozen=True)
class CoEngagedEvidence:
    shared_items: tuple[str, ...]

    def fields(self) -> tuple[str, ...]:
        return self.shared_items


@dataclass(frozen=True)
class OneHopEvidence:
    bridge: str
    source_item: str
    target_item: str

    def fields(self) -> tuple[str, ...]:
        return (self.bridge, self.source_item, self.target_item)


Evidence = Union[InSessionEvidence, CoEngagedEvidence, OneHopEvidence]


@dataclass(frozen=True)
class QueryPair:
    source_query: str
    target_query: str
    source_tokens: tuple[str, ...]
    target_tokens: tuple[str, ...]
    provenance: Provenance
    evidence: Evidence
    bucket: "IntentBucket | None" = None

    @classmethod
    def build(cls, source: str, target: str, provenance: Provenance,
              evidence: Evidence) -> "QueryPair":
        return cls(source, target, tuple(source.split()), tuple(target.split()),
                   provenance, evidence)

    def with_bucket(self, bucket: "IntentBucket") -> "QueryPair":
        return replace(self, bucket=bucket)


class CoClickGraph:
    """Bipartite query–item engagement graph, adjacency kept in both directions.

    Edges carry per-signal engagement counts aggregated over the whole log.
    Construction is restricted to a signal filter, default clicks only.
    """

    def __init__(self) -> None:
        self.query_items: dict[str, dict[str, dict[str, int]]] = {}
        self.item_queries: dict[str, set[str]] = {}

    def add_engagement(self, query: str, item_id: str, signal: str) -> None:
        signals = self.query_items.setdefault(query, {}).setdefault(item_id, {})
        signals[signal] = signals.get(signal, 0) + 1
        self.item_queries.setdefault(item_id, set()).add(query)

    def queries(self) -> list[str]:
        return sorted(self.query_items)

    def items_of(self, query: str) -> set[str]:
        return set(self.query_items.get(query, ()))

    def co_engaged(self, q1: str, q2: str) -> int:
        """Number of distinct items engaged under both queries. Symmetric."""
        if q1 == q2:
            return 0
        items1 = self.query_items.get(q1, {})
        items2 = self.query_items.get(q2, {})
        if len(items2) < len(items1):
            items1, items2 = items2, items1
        return sum(1 for item in items1 if item in items2)

    @property
    def num_queries(self) -> int:
        return len(self.query_items)

    @property
    def num_items(self) -> int:
        return len(self.item_queries)

    @property
    def num_edges(self) -> int:
        return sum(len(items) for items in self.query_items.values())

    def edge_set(self) -> set[tuple[str, str]]:
        return {(q, item) for q, items in self.query_items.items() for item in items}


def build_coclick_graph(log: SessionLog,
                        signal_filter: Iterable[str] = (CLICK,)) -> CoClickGraph:
    signals = frozenset(signal_filter)
    if not signals:
        raise ConfigError("signal_filter must not be empty")
    graph = CoClickGraph()
    for event in log.events():
        for eng in event.engagements:
            if eng.signal in signals:
                graph.add_engagement(event.query, eng.item_id, eng.signal)
    return graph


def mine_in_session(log: SessionLog, max_hops: int = 3, theta_eng: float = 1.0,
                    weights: dict[str, float] = DEFAULT_SIGNAL_WEIGHTS) -> list[QueryPair]:
    """Pairs (q_i, q_j) within a session: i < j, j - i <= max_hops, target engaged.

    Deduplicated on (source, target) keeping the first occurrence; output
    ordered by (session_id, source ts).
    """
    if max_hops < 1:
        raise ConfigError(f"max_hops must be >= 1, got {max_hops}")
    pairs: list[QueryPair] = []
    seen: set[tuple[str, str]] = set()
    for session_id in sorted(log.sessions):
        events = log.sessions[session_id]
        scores = [engagement_score(event, weights) for event in events]
        for i, src in enumerate(events):
            for j in range(i + 1, min(i + max_hops, len(events) - 1) + 1):
                tgt = events[j]
                if scores[j] < theta_eng:
                    continue
                if src.query == tgt.query:
                    continue
                key = (src.query, tgt.query)
                if key in seen:
                    continue
                seen.add(key)
                pairs.append(QueryPair.build(
                    src.query, tgt.query, Provenance.IN_SESSION,
                    InSessionEvidence(session_id=session_id, hops=j - i)))
    return pairs


def _sessions_by_query(log: SessionLog) -> dict[str, set[str]]:
    sessions: dict[str, set[str]] = {}
    for event in log.events():
        sessions.setdefault(event.query, set()).add(event.session_id)
    return sessions


def mine_cross_session_coengaged(graph: CoClickGraph, log: SessionLog,
                                 min_shared: int = 1) -> list[QueryPair]:
    """Unordered query pairs sharing >= min_shared engaged items, attestable
    from at least two distinct sessions. Emitted once, lexicographic order,
    shared items as evidence."""
    if min_shared < 1:
        raise ConfigError(f"min_shared must be >= 1, got {min_shared}")
    sessions_of = _sessions_by_query(log)
    shared: dict[tuple[str, str], set[str]] = {}
    for item, queries in graph.item_queries.items():
        for q1, q2 in combinations(sorted(queries), 2):
            shared.setdefault((q1, q2), set()).add(item)
    pairs = []
    for (q1, q2), items in sorted(shared.items()):
        if len(items) < min_shared:
            continue
        if len(sessions_of.get(q1, set()) | sessions_of.get(q2, set())) < 2:
            continue
        pairs.append(QueryPair.build(
            q1, q2, Provenance.CROSS_SESSION_COENGAGED,
            CoEngagedEvidence(shared_items=tuple(sorted(items)))))
    return pairs


def mine_cross_session_onehop(graph: CoClickGraph,
                              min_shared: int = 1) -> list[QueryPair]:
    """Pairs connected only through a bridge query (two hops in the bipartite
    graph) with zero directly shared items.

    Multiple bridges collapse to the lexicographically smallest one; the
    evidence records the bridge plus one witnessing item per hop.
    """
    if min_shared < 1:
        raise ConfigError(f"min_shared must be >= 1, got {min_shared}")
    co_counts: dict[str, dict[str, int]] = {}
    for item, queries in graph.item_queries.items():
        for q1, q2 in combinations(sorted(queries), 2):
            d1 = co_counts.setdefault(q1, {})
            d1[q2] = d1.get(q2, 0) + 1
            d2 = co_counts.setdefault(q2, {})
            d2[q1] = d2.get(q1, 0) + 1
    found: dict[tuple[str, str], OneHopEvidence] = {}
    for bridge in sorted(co_counts):
        neighbors = sorted(q for q, cnt in co_counts[bridge].items() if cnt >= min_shared)
        bridge_items = graph.items_of(bridge)
        for q1, q2 in combinations(neighbors, 2):
            if (q1, q2) in found:
                continue
            items1 = graph.items_of(q1)
            items2 = graph.items_of(q2)
            if items1 & items2:
                continue
            found[(q1, q2)] = OneHopEvidence(
                bridge=bridge,
                source_item=min(items1 & bridge_items),
                target_item=min(items2 & bridge_items))
    return [QueryPair.build(q1, q2, Provenance.CROSS_SESSION_ONEHOP, evidence)
            for (q1, q2), evidence in sorted(found.items())]


def mine_all(log: SessionLog, max_hops: int = 3, theta_eng: float = 1.0,
             min_shared: int = 1, signal_filter: Iterable[str] = (CLICK,),
             weights: dict[str, float] = DEFAULT_SIGNAL_WEIGHTS) -> list[QueryPair]:
    """Run all three miners; concatenated in provenance order."""
    graph = build_coclick_graph(log, signal_filter)
    pairs = mine_in_session(log, max_hops=max_hops, theta_eng=theta_eng, weights=weights)
    pairs += mine_cross_session_coengaged(graph, log, min_shared=min_shared)
    pairs += mine_cross_session_onehop(graph, min_shared=min_shared)
    return pairs


_EVIDENCE_PARSERS = {
    Provenance.IN_SESSION: lambda f: InSessionEvidence(f[0], int(f[1])),
    Provenance.CROSS_SESSION_COENGAGED: lambda f: CoEngagedEvidence(tuple(f)),
    Provenance.CROSS_SESSION_ONEHOP: lambda f: OneHopEvidence(f[0], f[1], f[2]),
}

_EVIDENCE_ARITY = {
    Provenance.IN_SESSION: (2, 2),
    Provenance.CROSS_SESSION_COENGAGED: (1, None),
    Provenance.CROSS_SESSION_ONEHOP: (3, 3),
}


def write_pairs(pairs: Iterable[QueryPair], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for pair in pairs:
            fields = pair.evidence.fields()
            for value in fields:
                if "\t" in value or "\n" in value or ";" in value:
                    raise ValidationError(
                        f"evidence field {value!r} contains a reserved character")
            fh.write("\t".join((pair.provenance.value, pair.source_query,
                                pair.target_query, ";".join(fields))))
            fh.write("\n")


def read_pairs(path: str | Path) -> list[QueryPair]:
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            columns = line.split("\t")
            if len(columns) != 4:
                raise ValidationError(
                    f"expected 4 tab-separated columns, got {len(columns)}", line=lineno)
            prov_name, source, target, evidence_raw = columns
            try:
                provenance = Provenance(prov_name)
            except ValueError:
                raise ValidationError(f"unknown provenance {prov_name!r}", line=lineno)
            fields = evidence_raw.split(";") if evidence_raw else []
            lo, hi = _EVIDENCE_ARITY[provenance]
            if len(fields) < lo or (hi is not None and len(fields) > hi):
                raise ValidationError(
                    f"evidence for {prov_name} must have "
                    f"{lo if hi == lo else f'at least {lo}'} fields", line=lineno)
            try:
                evidence = _EVIDENCE_PARSERS[provenance](fields)
            except (ValueError, IndexError) as exc:
                raise ValidationError(f"bad evidence {evidence_raw!r}: {exc}", line=lineno)
            if not source.strip() or not target.strip():
                raise ValidationError("empty source or target query", line=lineno)
            pairs.append(QueryPair.build(
                " ".join(normalize(source)), " ".join(normalize(target)),
                provenance, evidence))
    return pairs
