"""Tiny GRU encoder-decoder. Capacity is deliberately small: the point is the
intent-tag conditioning mechanism and the prediction file contract, not the
model quality."""

from __future__ import annotations

import torch
from torch import nn


class Seq2Seq(nn.Module):
    def __init__(self, vocab_size: int, embed_dim: int = 32, hidden_dim: int = 64):
        super().__init__()
        self.embed = nn.Embedding(vocab_size, embed_dim, padding_idx=0)
        self.encoder = nn.GRU(embed_dim, hidden_dim, batch_first=True)
        self.decoder = nn.GRU(embed_dim, hidden_dim, batch_first=True)
        self.out = nn.Linear(hidden_dim, vocab_size)

    def encode(self, src: torch.Tensor) -> torch.Tensor:
        _, hidden = self.encoder(self.embed(src))
        return hidden  # (1, batch, hidden_dim)

    def forward(self, src: torch.Tensor, tgt_in: torch.Tensor) -> torch.Tensor:
        hidden = self.encode(src)
        outputs, _ = self.decoder(self.embed(tgt_in), hidden)
        return self.out(outputs)

    def step(self, token: torch.Tensor, hidden: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """One decode step: (batch,) token ids -> (batch, vocab) logits."""
        output, hidden = self.decoder(self.embed(token.unsqueeze(1)), hidden)
        return self.out(output.squeeze(1)), hidden
