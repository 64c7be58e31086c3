"""Pipeline configuration: one JSON file wiring paths, thresholds and weights.

Relative paths inside the file resolve against the config file's directory, so
a config can travel with its fixtures. ``load`` validates that every non-null
referenced file exists and every threshold is in range; ``save(load(p))`` is
byte-stable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from qreform.baselines import BaselineConfig
from qreform.corpus import CLICK, DEFAULT_SIGNAL_WEIGHTS
from qreform.errors import ConfigError
from qreform.intents import IntentThresholds


@dataclass(frozen=True)
class MinerConfig:
    max_hops: int = 3
    theta_eng: float = 1.0
    min_shared: int = 1
    signal_filter: tuple[str, ...] = (CLICK,)

    def __post_init__(self) -> None:
        if self.max_hops < 1:
            raise ConfigError(f"max_hops must be >= 1, got {self.max_hops}")
        if self.theta_eng < 0:
            raise ConfigError(f"theta_eng must be >= 0, got {self.theta_eng}")
        if self.min_shared < 1:
            raise ConfigError(f"min_shared must be >= 1, got {self.min_shared}")
        if not self.signal_filter:
            raise ConfigError("signal_filter must not be empty")


@dataclass(frozen=True)
class PipelinePaths:
    log: Path | None = None
    taxonomy: Path | None = None
    lexicon: Path | None = None
    inventory: Path | None = None
    workdir: Path | None = None


@dataclass(frozen=True)
class PipelineConfig:
    paths: PipelinePaths = field(default_factory=PipelinePaths)
    signal_weights: dict[str, float] = field(
        default_factory=lambda: dict(DEFAULT_SIGNAL_WEIGHTS))
    miner: MinerConfig = field(default_factory=MinerConfig)
    intents: IntentThresholds = field(default_factory=IntentThresholds)
    baseline: BaselineConfig = field(default_factory=BaselineConfig)
    eval_k: int = 1

    def __post_init__(self) -> None:
        if self.eval_k < 1:
            raise ConfigError(f"eval_k must be >= 1, got {self.eval_k}")
        for kind, weight in self.signal_weights.items():
            if not math.isfinite(weight) or weight < 0:
                raise ConfigError(
                    f"signal weight for {kind!r} must be a finite value >= 0")

    @classmethod
    def from_dict(cls, data: dict, base_dir: Path | None = None) -> "PipelineConfig":
        def resolve(value: str | None) -> Path | None:
            if value is None:
                return None
            path = Path(value)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            return path

        raw_paths = data.get("paths", {})
        paths = PipelinePaths(
            log=resolve(raw_paths.get("log")),
            taxonomy=resolve(raw_paths.get("taxonomy")),
            lexicon=resolve(raw_paths.get("lexicon")),
            inventory=resolve(raw_paths.get("inventory")),
            workdir=resolve(raw_paths.get("workdir")),
        )
        miner_raw = data.get("miner", {})
        miner = MinerConfig(
            max_hops=miner_raw.get("max_hops", 3),
            theta_eng=miner_raw.get("theta_eng", 1.0),
            min_shared=miner_raw.get("min_shared", 1),
            signal_filter=tuple(miner_raw.get("signal_filter", [CLICK])),
        )
        intents_raw = data.get("intents", {})
        thresholds = IntentThresholds(
            tau_same=intents_raw.get("tau_same", 0.6),
            tau_sim=intents_raw.get("tau_sim", 0.2),
            tau_core=intents_raw.get("tau_core", 0.5),
            delta_len=intents_raw.get("delta_len", 1),
            recall_k=intents_raw.get("recall_k", 50),
        )
        baseline_raw = data.get("baseline", {})
        baseline = BaselineConfig(
            kind=baseline_raw.get("kind", "random_drop"),
            seed=baseline_raw.get("seed", 0),
            max_drop_fraction=baseline_raw.get("max_drop_fraction", 0.5),
            min_tokens_to_drop_from=baseline_raw.get("min_tokens_to_drop_from", 4),
        )
        return cls(
            paths=paths,
            signal_weights=dict(data.get("signal_weights", DEFAULT_SIGNAL_WEIGHTS)),
            miner=miner,
            intents=thresholds,
            baseline=baseline,
            eval_k=data.get("eval_k", 1),
        )

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        path = Path(path)
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc.msg}")
        config = cls.from_dict(data, base_dir=path.parent)
        for name in ("log", "taxonomy", "lexicon", "inventory"):
            ref = getattr(config.paths, name)
            if ref is not None and not ref.exists():
                raise ConfigError(f"config references missing {name} file: {ref}")
        return config

    def to_dict(self) -> dict:
        def path_str(path: Path | None) -> str | None:
            return None if path is None else str(path)

        return {
            "paths": {
                "log": path_str(self.paths.log),
                "taxonomy": path_str(self.paths.taxonomy),
                "lexicon": path_str(self.paths.lexicon),
                "inventory": path_str(self.paths.inventory),
                "workdir": path_str(self.paths.workdir),
            },
            "signal_weights": dict(sorted(self.signal_weights.items())),
            "miner": {
                "max_hops": self.miner.max_hops,
                "theta_eng": self.miner.theta_eng,
                "min_shared": self.miner.min_shared,
                "signal_filter": list(self.miner.signal_filter),
            },
            "intents": {
                "tau_same": self.intents.tau_same,
                "tau_sim": self.intents.tau_sim,
                "tau_core": self.intents.tau_core,
                "delta_len": self.intents.delta_len,
                "recall_k": self.intents.recall_k,
            },
            "baseline": {
                "kind": self.baseline.kind,
                "seed": self.baseline.seed,
                "max_drop_fraction": self.baseline.max_drop_fraction,
                "min_tokens_to_drop_from": self.baseline.min_tokens_to_drop_from,
            },
            "eval_k": self.eval_k,
        }

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
