"""Dataset parsing and vocabulary for the toy reformulator.

Input is the intent-tagged training file produced by the mining pipeline:
``<tag>\\tsource query\\ttarget query`` per line, tag one of <same>,
<similar>, <inspired>. The tag is consumed as the first source token, which
is the whole conditioning mechanism.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path

INTENT_TAGS = ("<same>", "<similar>", "<inspired>")

PAD, BOS, EOS, UNK = "<pad>", "<bos>", "<eos>", "<unk>"
SPECIALS = (PAD, BOS, EOS, UNK)


class DataError(ValueError):
    pass


@dataclass(frozen=True)
class Example:
    tag: str
    source: tuple[str, ...]  # tag already prepended
    target: tuple[str, ...]


def read_tagged_dataset(path: str | Path) -> list[Example]:
    examples = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            columns = line.split("\t")
            if len(columns) != 3:
                raise DataError(f"line {lineno}: expected 3 columns, got {len(columns)}")
            tag, source, target = columns
            if tag not in INTENT_TAGS:
                raise DataError(f"line {lineno}: missing or unknown intent tag {tag!r}")
            src_tokens = tuple(source.split())
            tgt_tokens = tuple(target.split())
            if not src_tokens or not tgt_tokens:
                raise DataError(f"line {lineno}: empty source or target")
            examples.append(Example(tag, (tag,) + src_tokens, tgt_tokens))
    return examples


def validate_for_training(examples: list[Example]) -> None:
    if not examples:
        raise DataError("dataset is empty")
    if len(examples) < 2:
        raise DataError("dataset has a single example; need at least 2")
    tags = {ex.tag for ex in examples}
    if len(tags) < 2:
        raise DataError(
            f"dataset carries only {sorted(tags)}; multitask conditioning "
            "needs at least 2 intent tags")


class Vocab:
    """Frequency-capped word vocabulary built from the training split only."""

    def __init__(self, examples: list[Example], cap: int):
        counts: Counter[str] = Counter()
        for ex in examples:
            counts.update(ex.source)
            counts.update(ex.target)
        # deterministic order: frequency desc, then token
        kept = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        kept = kept[:max(0, cap - len(SPECIALS))]
        self.itos: list[str] = list(SPECIALS) + [tok for tok, _ in kept]
        self.stoi: dict[str, int] = {tok: i for i, tok in enumerate(self.itos)}

    def __len__(self) -> int:
        return len(self.itos)

    def encode(self, tokens: tuple[str, ...] | list[str]) -> list[int]:
        unk = self.stoi[UNK]
        return [self.stoi.get(tok, unk) for tok in tokens]

    def decode(self, ids: list[int]) -> list[str]:
        return [self.itos[i] for i in ids]
