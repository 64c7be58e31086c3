"""Training loop: deterministic for a fixed spec and seed.

The artifact file bundles the model weights, the vocabulary, the hyperparams
and the per-epoch loss curve, so prediction needs nothing else.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import torch
from torch import nn

from tagseq.data import (BOS, EOS, Example, Vocab, read_tagged_dataset,
                         validate_for_training)
from tagseq.model import Seq2Seq


@dataclass(frozen=True)
class TrainSpec:
    dataset: str
    vocab_cap: int = 2000
    embed_dim: int = 32
    hidden_dim: int = 64
    epochs: int = 300
    lr: float = 5e-3
    seed: int = 0
    k: int = 5


def _pad_batch(rows: list[list[int]], pad: int = 0) -> torch.Tensor:
    width = max(len(row) for row in rows)
    return torch.tensor([row + [pad] * (width - len(row)) for row in rows],
                        dtype=torch.long)


def _tensorize(examples: list[Example], vocab: Vocab):
    bos, eos = vocab.stoi[BOS], vocab.stoi[EOS]
    src = _pad_batch([vocab.encode(ex.source) for ex in examples])
    tgt_in = _pad_batch([[bos] + vocab.encode(ex.target) for ex in examples])
    tgt_out = _pad_batch([vocab.encode(ex.target) + [eos] for ex in examples])
    return src, tgt_in, tgt_out


def train(spec: TrainSpec) -> dict:
    """Train and return the in-memory artifact (see ``save_model``)."""
    examples = read_tagged_dataset(spec.dataset)
    validate_for_training(examples)
    torch.manual_seed(spec.seed)
    torch.set_num_threads(1)

    vocab = Vocab(examples, spec.vocab_cap)
    model = Seq2Seq(len(vocab), spec.embed_dim, spec.hidden_dim)
    optimizer = torch.optim.Adam(model.parameters(), lr=spec.lr)
    criterion = nn.CrossEntropyLoss(ignore_index=vocab.stoi["<pad>"])
    src, tgt_in, tgt_out = _tensorize(examples, vocab)

    losses = []
    model.train()
    for _ in range(spec.epochs):
        optimizer.zero_grad()
        logits = model(src, tgt_in)
        loss = criterion(logits.reshape(-1, logits.size(-1)), tgt_out.reshape(-1))
        loss.backward()
        optimizer.step()
        losses.append(float(loss.item()))

    max_target_len = max(len(ex.target) for ex in examples)
    return {
        "state_dict": model.state_dict(),
        "itos": vocab.itos,
        "spec": asdict(spec),
        "losses": losses,
        "max_target_len": max_target_len,
    }


def save_model(artifact: dict, path: str | Path) -> None:
    torch.save(artifact, path)
    log_path = Path(path).with_name(Path(path).name + ".train_log.json")
    with open(log_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump({"losses": artifact["losses"], "spec": artifact["spec"]},
                  fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path: str | Path) -> tuple[Seq2Seq, "LoadedVocab", dict]:
    artifact = torch.load(path, weights_only=False)
    vocab = LoadedVocab(artifact["itos"])
    spec = artifact["spec"]
    model = Seq2Seq(len(vocab.itos), spec["embed_dim"], spec["hidden_dim"])
    model.load_state_dict(artifact["state_dict"])
    model.eval()
    return model, vocab, artifact


class LoadedVocab:
    def __init__(self, itos: list[str]):
        self.itos = itos
        self.stoi = {tok: i for i, tok in enumerate(itos)}

    def encode(self, tokens) -> list[int]:
        unk = self.stoi["<unk>"]
        return [self.stoi.get(tok, unk) for tok in tokens]

    def decode(self, ids: list[int]) -> list[str]:
        return [self.itos[i] for i in ids]
