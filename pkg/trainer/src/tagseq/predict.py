"""Top-k decoding into the evaluation harness's predictions format.

Candidate 1 is the greedy decode; the rest are temperature samples with a
per-instance seeded generator, deduplicated, padded by repeating the best
candidate when decoding yields fewer than k distinct outputs. Unknown source
tokens map to <unk> and never crash decoding.
"""

from __future__ import annotations

from pathlib import Path

import torch

from tagseq.data import BOS, EOS, PAD, UNK, Example, read_tagged_dataset
from tagseq.model import Seq2Seq


def _decode(model: Seq2Seq, vocab, src_ids: list[int], max_len: int,
            generator: torch.Generator | None = None,
            temperature: float = 0.8) -> list[str]:
    src = torch.tensor([src_ids], dtype=torch.long)
    hidden = model.encode(src)
    token = torch.tensor([vocab.stoi[BOS]], dtype=torch.long)
    banned = {vocab.stoi[PAD], vocab.stoi[BOS], vocab.stoi[UNK]}
    out_ids: list[int] = []
    for _ in range(max_len):
        logits, hidden = model.step(token, hidden)
        logits[0, list(banned)] = float("-inf")
        if generator is None:
            next_id = int(logits.argmax(dim=-1).item())
        else:
            probs = torch.softmax(logits / temperature, dim=-1)
            next_id = int(torch.multinomial(probs[0], 1, generator=generator).item())
        if next_id == vocab.stoi[EOS]:
            break
        out_ids.append(next_id)
        token = torch.tensor([next_id], dtype=torch.long)
    return vocab.decode(out_ids)


def top_k_candidates(model: Seq2Seq, vocab, source_with_tag: tuple[str, ...],
                     k: int, max_len: int, seed: int, index: int) -> list[str]:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    src_ids = vocab.encode(source_with_tag)
    with torch.no_grad():
        candidates = [" ".join(_decode(model, vocab, src_ids, max_len))]
        generator = torch.Generator()
        generator.manual_seed(seed * 1_000_003 + index)
        attempts = 0
        while len(candidates) < k and attempts < 4 * k:
            sampled = " ".join(_decode(model, vocab, src_ids, max_len,
                                       generator=generator))
            attempts += 1
            if sampled not in candidates:
                candidates.append(sampled)
    while len(candidates) < k:
        candidates.append(candidates[0])
    return candidates


def predict_file(model: Seq2Seq, vocab, artifact: dict, dataset_path: str | Path,
                 out_path: str | Path, k: int, seed: int = 0) -> int:
    """Decode every dataset row into the harness predictions format:
    source<TAB>gold<TAB>tag<TAB>cand1..candk. Returns the row count."""
    examples = read_tagged_dataset(dataset_path)
    max_len = artifact["max_target_len"] + 2
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        for index, ex in enumerate(examples):
            candidates = top_k_candidates(model, vocab, ex.source, k, max_len,
                                          seed, index)
            source_text = " ".join(ex.source[1:])  # strip the conditioning tag
            target_text = " ".join(ex.target)
            fh.write("\t".join((source_text, target_text, ex.tag, *candidates)))
            fh.write("\n")
    return len(examples)
