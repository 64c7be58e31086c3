"""Seeded synthetic session-log generator.

Desk-scale stand-in for real behavioral logs: plants a requested number of
in-session reformulation chains, cross-session co-click cliques, and two-hop
bridge patterns, then fills the remainder with noise sessions. The returned
manifest lists every planted pair so tests can check miner recall against it.

Planted patterns reserve their queries and items exclusively (sampled without
replacement per category); noise sessions draw only from the leftovers. That
keeps every planted pattern's defining predicate true in the full log — in
particular a bridge pattern's endpoints can never accidentally share an item.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from qreform.corpus import CLICK, BID, ADD_TO_CART, BOUGHT, Engagement, SessionEvent, SessionLog, normalize
from qreform.errors import SpecError

_EXTRA_SIGNALS = (BOUGHT, BID, ADD_TO_CART)

# In-session chains refine the source query with one of these, mimicking the
# narrow-down reformulations buyers actually type.
_CHAIN_MODIFIERS = ("new", "used", "cheap", "black", "white", "original", "sale")


@dataclass(frozen=True)
class CategorySpec:
    queries: tuple[str, ...]
    items: tuple[str, ...]


@dataclass(frozen=True)
class GeneratorSpec:
    sessions: int
    categories: dict[str, CategorySpec]
    in_session_chains: int = 0
    coclick_cliques: int = 0
    two_hop_bridges: int = 0
    events_per_session: tuple[int, int] = (1, 4)
    base_ts: int = 1_000_000

    @classmethod
    def from_dict(cls, data: dict) -> "GeneratorSpec":
        categories = {
            cat: CategorySpec(queries=tuple(spec["queries"]), items=tuple(spec["items"]))
            for cat, spec in data["categories"].items()
        }
        patterns = data.get("patterns", {})
        events = data.get("events_per_session", [1, 4])
        return cls(
            sessions=data["sessions"],
            categories=categories,
            in_session_chains=patterns.get("in_session_chains", 0),
            coclick_cliques=patterns.get("coclick_cliques", 0),
            two_hop_bridges=patterns.get("two_hop_bridges", 0),
            events_per_session=(events[0], events[1]),
            base_ts=data.get("base_ts", 1_000_000),
        )

    @classmethod
    def load(cls, path: str | Path) -> "GeneratorSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class _Pool:
    """Per-category reservation pool. Patterns pop, noise samples what is left."""
    category: str
    queries: list[str]
    items: list[str]

    def take_queries(self, n: int) -> list[str]:
        if len(self.queries) < n:
            raise SpecError(
                f"category {self.category!r} has too few distinct queries for the "
                f"requested patterns (need {n} more, {len(self.queries)} left)")
        taken, self.queries = self.queries[:n], self.queries[n:]
        return taken

    def take_items(self, n: int) -> list[str]:
        if len(self.items) < n:
            raise SpecError(
                f"category {self.category!r} has too few items for the "
                f"requested patterns (need {n} more, {len(self.items)} left)")
        taken, self.items = self.items[:n], self.items[n:]
        return taken


def _validate(spec: GeneratorSpec) -> None:
    if spec.sessions < 1:
        raise SpecError("spec must request at least one session")
    if not spec.categories:
        raise SpecError("spec must define at least one category")
    lo, hi = spec.events_per_session
    if lo < 1 or hi < lo:
        raise SpecError(f"bad events_per_session range ({lo}, {hi})")
    for cat, cspec in spec.categories.items():
        if not cspec.queries:
            raise SpecError(f"category {cat!r} has an empty query vocabulary")
        if not cspec.items:
            raise SpecError(f"category {cat!r} has an empty item inventory")


def _build_pools(spec: GeneratorSpec, rng: random.Random) -> dict[str, _Pool]:
    pools = {}
    for cat in sorted(spec.categories):
        cspec = spec.categories[cat]
        queries, seen = [], set()
        for raw in cspec.queries:
            norm = " ".join(normalize(raw))
            if norm and norm not in seen:
                seen.add(norm)
                queries.append(norm)
        if not queries:
            raise SpecError(f"category {cat!r} has no usable queries after normalization")
        items = list(dict.fromkeys(cspec.items))
        pools[cat] = _Pool(cat, rng.sample(queries, len(queries)),
                           rng.sample(items, len(items)))
    return pools


class _SessionBuilder:
    def __init__(self, base_ts: int, rng: random.Random):
        self.base_ts = base_ts
        self.rng = rng
        self.counter = 0
        self.events: list[SessionEvent] = []

    def new_session(self) -> tuple[str, int]:
        sid = f"s{self.counter:05d}"
        start_ts = self.base_ts + self.counter * 10_000
        self.counter += 1
        return sid, start_ts

    def add(self, sid: str, ts: int, query: str, category: str,
            engagements: tuple[Engagement, ...]) -> int:
        self.events.append(SessionEvent.build(sid, ts, query, category, engagements))
        return ts + self.rng.randint(50, 500)


def generate_synthetic_log(spec: GeneratorSpec, seed: int) -> tuple[SessionLog, dict]:
    """Deterministic (spec, seed) -> (log, manifest of planted pairs)."""
    _validate(spec)
    rng = random.Random(seed)
    pools = _build_pools(spec, rng)
    cats = sorted(pools)
    builder = _SessionBuilder(spec.base_ts, rng)
    manifest: dict[str, list[dict]] = {
        "in_session": [], "cross_session_coengaged": [], "cross_session_onehop": []}

    def pool_for(index: int) -> _Pool:
        return pools[cats[index % len(cats)]]

    for i in range(spec.in_session_chains):
        pool = pool_for(i)
        (src,) = pool.take_queries(1)
        modifiers = [m for m in _CHAIN_MODIFIERS if m not in src.split()]
        tgt = f"{src} {rng.choice(modifiers)}"
        (item,) = pool.take_items(1)
        sid, ts = builder.new_session()
        ts = builder.add(sid, ts, src, pool.category, ())
        builder.add(sid, ts, tgt, pool.category, (Engagement(item, CLICK),))
        manifest["in_session"].append(
            {"source": src, "target": tgt, "session": sid, "category": pool.category})

    for i in range(spec.coclick_cliques):
        pool = pool_for(spec.in_session_chains + i)
        q1, q2 = pool.take_queries(2)
        items = pool.take_items(2)
        for query in (q1, q2):
            sid, ts = builder.new_session()
            builder.add(sid, ts, query, pool.category,
                        tuple(Engagement(item, CLICK) for item in items))
        lo, hi = sorted((q1, q2))
        manifest["cross_session_coengaged"].append(
            {"source": lo, "target": hi, "items": sorted(items), "category": pool.category})

    for i in range(spec.two_hop_bridges):
        pool = pool_for(spec.in_session_chains + spec.coclick_cliques + i)
        qa, bridge, qb = pool.take_queries(3)
        item_a, item_b = pool.take_items(2)
        sid, ts = builder.new_session()
        builder.add(sid, ts, qa, pool.category, (Engagement(item_a, CLICK),))
        sid, ts = builder.new_session()
        builder.add(sid, ts, bridge, pool.category,
                    (Engagement(item_a, CLICK), Engagement(item_b, CLICK)))
        sid, ts = builder.new_session()
        builder.add(sid, ts, qb, pool.category, (Engagement(item_b, CLICK),))
        lo, hi = sorted((qa, qb))
        manifest["cross_session_onehop"].append(
            {"source": lo, "target": hi, "bridge": bridge, "category": pool.category})

    noise_cats = [cat for cat in cats if pools[cat].queries]
    if not noise_cats:
        raise SpecError("no queries left for noise sessions; add vocabulary or "
                        "reduce the planted pattern counts")
    lo, hi = spec.events_per_session
    for _ in range(spec.sessions):
        sid, ts = builder.new_session()
        for _ in range(rng.randint(lo, hi)):
            pool = pools[rng.choice(noise_cats)]
            query = rng.choice(pool.queries)
            engagements = []
            if pool.items and rng.random() < 0.6:
                engagements.append(Engagement(rng.choice(pool.items), CLICK))
                if rng.random() < 0.2:
                    engagements.append(Engagement(rng.choice(pool.items),
                                                  rng.choice(_EXTRA_SIGNALS)))
            ts = builder.add(sid, ts, query, pool.category, tuple(engagements))

    log = SessionLog.from_events(builder.events)
    manifest_doc = {
        "seed": seed,
        "planted": manifest,
        "counts": {kind: len(entries) for kind, entries in manifest.items()},
    }
    return log, manifest_doc


def write_manifest(manifest: dict, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")
