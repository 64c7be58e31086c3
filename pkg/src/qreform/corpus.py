"""Behavioral-log data model: events, engagement scoring, taxonomy, log file I/O.

The log file format is newline-delimited JSON, one search impression per line:

    {"session_id": "s1", "ts": 1000, "query": "nike air jordan 4",
     "category": "shoes-athletic", "engagements": [{"item": "i1", "signal": "click"}]}

UTF-8, LF line endings. ``write_log`` followed by ``load_log`` reproduces the
log exactly.
"""

from __future__ import annotations

import json
import string
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from qreform.errors import ConfigError, ValidationError

# Well-known engagement signal kinds. The set is open: any kind present in the
# configured weights map is accepted, so deployments can add their own.
CLICK = "click"
BID = "bid"
ADD_TO_CART = "add_to_cart"
BOUGHT = "bought"

DEFAULT_SIGNAL_WEIGHTS: dict[str, float] = {
    CLICK: 1.0,
    BID: 3.0,
    ADD_TO_CART: 4.0,
    BOUGHT: 5.0,
}


@dataclass(frozen=True)
class NormalizeConfig:
    lowercase: bool = True
    strip_chars: str = string.punctuation


DEFAULT_NORMALIZE = NormalizeConfig()


def normalize(raw_query: str, cfg: NormalizeConfig = DEFAULT_NORMALIZE) -> list[str]:
    """Tokenize a query: lowercase, collapse whitespace, strip token-edge punctuation.

    Total on arbitrary text and idempotent: normalizing the space-joined
    output yields the same token list. Empty or all-punctuation input
    yields an empty list. Interior punctuation is kept ("mr.children",
    "13-inch"), so tokens with embedded digits survive intact.
    """
    text = raw_query.lower() if cfg.lowercase else raw_query
    tokens = []
    for tok in text.split():
        tok = tok.strip(cfg.strip_chars)
        if tok:
            tokens.append(tok)
    return tokens


@dataclass(frozen=True)
class Engagement:
    item_id: str
    signal: str


@dataclass(frozen=True)
class SessionEvent:
    session_id: str
    ts: int
    raw_query: str
    tokens: tuple[str, ...]
    category_id: str
    engagements: tuple[Engagement, ...] = ()

    @classmethod
    def build(cls, session_id: str, ts: int, raw_query: str, category_id: str,
              engagements: tuple[Engagement, ...] = (),
              cfg: NormalizeConfig = DEFAULT_NORMALIZE) -> "SessionEvent":
        return cls(session_id, ts, raw_query, tuple(normalize(raw_query, cfg)),
                   category_id, tuple(engagements))

    @property
    def query(self) -> str:
        """Normalized query string (the canonical key used by the miners)."""
        return " ".join(self.tokens)


def engagement_score(event: SessionEvent, weights: dict[str, float]) -> float:
    """Weighted sum of the event's engagement signals; 0.0 for no engagements."""
    total = 0.0
    for eng in event.engagements:
        if eng.signal not in weights:
            raise ConfigError(f"unknown engagement signal kind {eng.signal!r}")
        total += weights[eng.signal]
    return total


class Taxonomy:
    """Category tree with a single root. Leaves are nodes without children.

    ``meta_category`` maps any non-root node to its depth-1 ancestor (the
    top-level department right under the root).
    """

    def __init__(self, parents: dict[str, str | None]):
        roots = [node for node, parent in parents.items() if parent is None]
        if len(roots) != 1:
            raise ValidationError(f"taxonomy must have exactly one root, found {len(roots)}")
        self.root = roots[0]
        for node, parent in parents.items():
            if parent is not None and parent not in parents:
                raise ValidationError(f"taxonomy node {node!r} has unknown parent {parent!r}")
        self._parents = dict(parents)
        self._children: dict[str, set[str]] = {node: set() for node in parents}
        for node, parent in parents.items():
            if parent is not None:
                self._children[parent].add(node)
        # reachability doubles as a cycle check
        seen = set()
        stack = [self.root]
        while stack:
            node = stack.pop()
            seen.add(node)
            stack.extend(self._children[node])
        unreachable = set(parents) - seen
        if unreachable:
            raise ValidationError(f"taxonomy nodes unreachable from root: {sorted(unreachable)}")

    def __contains__(self, node: str) -> bool:
        return node in self._parents

    def is_leaf(self, node: str) -> bool:
        return not self._children[node]

    def leaves(self) -> list[str]:
        return sorted(node for node in self._parents if self.is_leaf(node))

    def parent(self, node: str) -> str | None:
        return self._parents[node]

    def meta_category(self, node: str) -> str:
        """Depth-1 ancestor of ``node``; a depth-1 node is its own meta category."""
        if node not in self._parents:
            raise ValidationError(f"unknown taxonomy node {node!r}")
        if node == self.root:
            raise ValidationError("root has no meta category")
        while self._parents[node] != self.root:
            node = self._parents[node]  # type: ignore[assignment]
        return node

    @classmethod
    def from_dict(cls, data: dict) -> "Taxonomy":
        parents = {entry["id"]: entry.get("parent") for entry in data["nodes"]}
        return cls(parents)

    @classmethod
    def load(cls, path: str | Path) -> "Taxonomy":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        nodes = [{"id": node, "parent": parent}
                 for node, parent in sorted(self._parents.items())]
        return {"nodes": nodes}


class SessionLog:
    """Immutable container of events grouped by session, ts-ascending per group.

    Safe to share across concurrent readers; all mining operations treat it as
    read-only.
    """

    def __init__(self, sessions: dict[str, tuple[SessionEvent, ...]]):
        self.sessions = sessions

    @classmethod
    def from_events(cls, events: list[SessionEvent],
                    taxonomy: Taxonomy | None = None) -> "SessionLog":
        grouped: dict[str, list[SessionEvent]] = {}
        for event in events:
            if not event.tokens:
                raise ValidationError(
                    f"event with empty normalized query {event.raw_query!r}",
                    session=event.session_id)
            if tuple(normalize(event.raw_query)) != event.tokens:
                raise ValidationError(
                    f"event tokens do not match normalize({event.raw_query!r})",
                    session=event.session_id)
            if taxonomy is not None and event.category_id not in taxonomy:
                raise ValidationError(
                    f"unknown category {event.category_id!r}", session=event.session_id)
            grouped.setdefault(event.session_id, []).append(event)
        for session_id, group in grouped.items():
            for prev, cur in zip(group, group[1:]):
                if cur.ts <= prev.ts:
                    raise ValidationError(
                        f"timestamps not strictly increasing ({prev.ts} then {cur.ts})",
                        session=session_id)
        return cls({sid: tuple(group) for sid, group in grouped.items()})

    def events(self) -> Iterator[SessionEvent]:
        for group in self.sessions.values():
            yield from group

    @property
    def num_events(self) -> int:
        return sum(len(group) for group in self.sessions.values())

    @property
    def num_sessions(self) -> int:
        return len(self.sessions)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SessionLog) and self.sessions == other.sessions

    def __repr__(self) -> str:
        return f"SessionLog(sessions={self.num_sessions}, events={self.num_events})"


def _event_to_record(event: SessionEvent) -> dict:
    return {
        "session_id": event.session_id,
        "ts": event.ts,
        "query": event.raw_query,
        "category": event.category_id,
        "engagements": [{"item": e.item_id, "signal": e.signal} for e in event.engagements],
    }


def write_log(log: SessionLog, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for event in log.events():
            fh.write(json.dumps(_event_to_record(event), ensure_ascii=False,
                                separators=(",", ":")))
            fh.write("\n")


def load_log(path: str | Path, taxonomy: Taxonomy | None = None) -> SessionLog:
    """Parse an NDJSON log. Malformed lines raise with line number and byte offset."""
    events = []
    offset = 0
    with open(path, "rb") as fh:
        for lineno, raw_line in enumerate(fh, start=1):
            line_offset = offset
            offset += len(raw_line)
            line = raw_line.decode("utf-8").strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"malformed JSON: {exc.msg}",
                                      line=lineno, offset=line_offset) from exc
            for key in ("session_id", "ts", "query", "category"):
                if key not in record:
                    raise ValidationError(f"missing field {key!r}",
                                          line=lineno, offset=line_offset)
            if not isinstance(record["ts"], int):
                raise ValidationError("field 'ts' must be an integer",
                                      line=lineno, offset=line_offset)
            engagements = tuple(
                Engagement(item_id=e["item"], signal=e["signal"])
                for e in record.get("engagements", []))
            event = SessionEvent.build(
                session_id=record["session_id"], ts=record["ts"],
                raw_query=record["query"], category_id=record["category"],
                engagements=engagements)
            if not event.tokens:
                raise ValidationError(
                    f"query normalizes to nothing: {record['query']!r}",
                    line=lineno, offset=line_offset)
            events.append(event)
    return SessionLog.from_events(events, taxonomy=taxonomy)
