"""Reference reformulators runnable without a trained model.

``theta_r`` is the stochastic token-drop baseline: queries with fewer than
``min_tokens_to_drop_from`` tokens pass through unchanged; eligible queries
lose d tokens, d drawn uniformly from {1, ..., floor(max_drop_fraction * n)},
survivors keep their order. Dropping at least one token makes the baseline's
Same mass equal exactly the short-query fraction of the corpus.

Randomness is derived per (seed, instance index), so parallel and serial runs
produce identical predictions.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path

from qreform.errors import ConfigError
from qreform.intents import read_dataset
from qreform.metrics import write_predictions

RANDOM_DROP = "random_drop"
IDENTITY = "identity"


@dataclass(frozen=True)
class BaselineConfig:
    kind: str = RANDOM_DROP
    seed: int = 0
    max_drop_fraction: float = 0.5
    min_tokens_to_drop_from: int = 4

    def __post_init__(self) -> None:
        if self.kind not in (RANDOM_DROP, IDENTITY):
            raise ConfigError(f"unknown baseline kind {self.kind!r}")
        if not (0.0 < self.max_drop_fraction < 1.0):
            raise ConfigError(
                f"max_drop_fraction must be in (0, 1), got {self.max_drop_fraction}")
        if self.min_tokens_to_drop_from < 2:
            raise ConfigError(
                f"min_tokens_to_drop_from must be >= 2, got {self.min_tokens_to_drop_from}")


def _instance_rng(seed: int, index: int) -> random.Random:
    # string seeding hashes with sha512 internally: stable across platforms
    return random.Random(f"{seed}:{index}")


def theta_r(src_tokens: list[str] | tuple[str, ...], cfg: BaselineConfig,
            instance_index: int = 0) -> list[str]:
    """Randomly drop tokens from an eligible query; short queries pass through."""
    tokens = list(src_tokens)
    if len(tokens) < cfg.min_tokens_to_drop_from:
        return tokens
    rng = _instance_rng(cfg.seed, instance_index)
    max_drop = max(1, int(cfg.max_drop_fraction * len(tokens)))
    drop = rng.randint(1, max_drop)
    dropped = set(rng.sample(range(len(tokens)), drop))
    return [tok for i, tok in enumerate(tokens) if i not in dropped]


def identity_rewrite(src_tokens: list[str] | tuple[str, ...]) -> list[str]:
    return list(src_tokens)


def run_baseline(dataset_path: str | Path, cfg: BaselineConfig,
                 out_path: str | Path) -> int:
    """Produce one prediction line per dataset line, in dataset order.

    Byte-reproducible for a fixed config. Returns the number of predictions.
    """
    rows = []
    for index, (bucket, source, target) in enumerate(read_dataset(dataset_path)):
        src_tokens = source.split()
        if cfg.kind == RANDOM_DROP:
            pred = theta_r(src_tokens, cfg, instance_index=index)
        else:
            pred = identity_rewrite(src_tokens)
        rows.append((source, target, bucket.tag, [" ".join(pred)]))
    write_predictions(rows, out_path)
    return len(rows)
