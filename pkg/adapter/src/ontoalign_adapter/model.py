"""Tiny byte-level encoder-decoder transformer.

Text goes in as raw UTF-8 bytes (no tokenizer), shifted by three to leave
room for padding, sequence-start and sequence-end symbols. The model is
deliberately small: its job in this repository is to memorize toy corpora
and demonstrate the serving contract, not to reach benchmark quality.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import torch
from torch import nn

PAD, BOS, EOS = 0, 1, 2
BYTE_OFFSET = 3
VOCAB = 256 + BYTE_OFFSET


def encode_text(text: str, limit: int) -> list[int]:
    return [b + BYTE_OFFSET for b in text.encode("utf-8")[:limit]]


def decode_ids(ids: list[int]) -> str:
    raw = bytes(i - BYTE_OFFSET for i in ids if i >= BYTE_OFFSET)
    return raw.decode("utf-8", errors="replace")


@dataclass
class AdapterConfig:
    d_model: int = 128
    n_heads: int = 4
    encoder_layers: int = 2
    decoder_layers: int = 2
    ffn_dim: int = 256
    dropout: float = 0.0
    max_source_len: int = 96
    max_target_len: int = 32
    # Optimization defaults: AdamW with weight decay 1e-2 and eps 1e-8,
    # learning rate 1e-3 under a linear-decay schedule with warm-up
    # measured in epochs.
    learning_rate: float = 1e-3
    weight_decay: float = 1e-2
    adam_eps: float = 1e-8
    warmup_epochs: float = 1.5
    epochs: int = 300
    batch_size: int = 20
    temperature: float = 1.0
    pooling: str = "mean"
    seed: int = 0
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "AdapterConfig":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in data.items() if k in known})


class ByteSeq2Seq(nn.Module):
    def __init__(self, config: AdapterConfig):
        super().__init__()
        self.config = config
        d = config.d_model
        self.src_embed = nn.Embedding(VOCAB, d, padding_idx=PAD)
        self.tgt_embed = nn.Embedding(VOCAB, d, padding_idx=PAD)
        self.src_pos = nn.Embedding(config.max_source_len + 8, d)
        self.tgt_pos = nn.Embedding(config.max_target_len + 8, d)
        self.transformer = nn.Transformer(
            d_model=d,
            nhead=config.n_heads,
            num_encoder_layers=config.encoder_layers,
            num_decoder_layers=config.decoder_layers,
            dim_feedforward=config.ffn_dim,
            dropout=config.dropout,
            batch_first=True,
        )
        self.out = nn.Linear(d, VOCAB)

    def _positions(self, length: int) -> torch.Tensor:
        return torch.arange(length)

    def encode(self, src: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """(memory, key padding mask) for a batch of source id sequences."""
        mask = src == PAD
        x = self.src_embed(src) + self.src_pos(self._positions(src.size(1)))[None, :, :]
        memory = self.transformer.encoder(x, src_key_padding_mask=mask)
        return memory, mask

    def decode_logits(
        self, memory: torch.Tensor, memory_mask: torch.Tensor, tgt: torch.Tensor
    ) -> torch.Tensor:
        causal = nn.Transformer.generate_square_subsequent_mask(tgt.size(1))
        y = self.tgt_embed(tgt) + self.tgt_pos(self._positions(tgt.size(1)))[None, :, :]
        decoded = self.transformer.decoder(
            y,
            memory,
            tgt_mask=causal,
            tgt_key_padding_mask=tgt == PAD,
            memory_key_padding_mask=memory_mask,
        )
        return self.out(decoded)

    def forward(self, src: torch.Tensor, tgt_in: torch.Tensor) -> torch.Tensor:
        memory, mask = self.encode(src)
        return self.decode_logits(memory, mask, tgt_in)

    @torch.no_grad()
    def embed_text(self, text: str) -> list[float]:
        """Mean-pooled encoder states of one text."""
        self.eval()
        ids = encode_text(text, self.config.max_source_len) or [EOS]
        src = torch.tensor([ids], dtype=torch.long)
        memory, _ = self.encode(src)
        pooled = memory[0].mean(dim=0)
        return [float(v) for v in pooled]

    @torch.no_grad()
    def greedy_generate(self, model_input: str) -> str:
        """Free-running greedy byte generation (no trie constraint)."""
        self.eval()
        ids = encode_text(model_input, self.config.max_source_len) or [EOS]
        src = torch.tensor([ids], dtype=torch.long)
        memory, mask = self.encode(src)
        generated = [BOS]
        for _ in range(self.config.max_target_len):
            tgt = torch.tensor([generated], dtype=torch.long)
            logits = self.decode_logits(memory, mask, tgt)
            nxt = int(logits[0, -1].argmax())
            if nxt == EOS:
                break
            generated.append(nxt)
        return decode_ids(generated[1:])

    @torch.no_grad()
    def score_continuations(
        self, model_input: str, prefix_text: str, continuations: list[bytes]
    ) -> list[float]:
        """Sum of byte log-probabilities for each continuation of the prefix.

        A continuation is scored on its own bytes only (the sequence may go
        on afterwards); the empty continuation is scored as the probability
        of the sequence ending right after the prefix.
        """
        self.eval()
        ids = encode_text(model_input, self.config.max_source_len) or [EOS]
        src = torch.tensor([ids], dtype=torch.long)
        memory, mask = self.encode(src)
        prefix_ids = [BOS] + encode_text(prefix_text, self.config.max_target_len)

        rows, targets = [], []
        max_len = 0
        for continuation in continuations:
            cont_ids = [b + BYTE_OFFSET for b in continuation] if continuation else [EOS]
            cont_ids = cont_ids[: max(1, self.config.max_target_len - len(prefix_ids) + 2)]
            row = prefix_ids + cont_ids[:-1]
            rows.append(row)
            targets.append((len(prefix_ids) - 1, cont_ids))
            max_len = max(max_len, len(row))

        batch = torch.full((len(rows), max_len), PAD, dtype=torch.long)
        for i, row in enumerate(rows):
            batch[i, : len(row)] = torch.tensor(row, dtype=torch.long)
        logits = self.decode_logits(
            memory.expand(len(rows), -1, -1), mask.expand(len(rows), -1), batch
        )
        log_probs = torch.log_softmax(logits, dim=-1)

        scores = []
        for i, (start, cont_ids) in enumerate(targets):
            total = 0.0
            for offset, token_id in enumerate(cont_ids):
                total += float(log_probs[i, start + offset, token_id])
            scores.append(total)
        return scores
