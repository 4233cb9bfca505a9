"""BiLSTM + shallow-feature MLP that scores a sentence in (0, 1)."""

from __future__ import annotations

import copy
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
import torch
from torch import nn
from torch.nn.utils.rnn import pack_padded_sequence, pad_sequence

from .exceptions import DimensionMismatch
from .features import N_FEATURES


@dataclass
class NetworkConfig:
    embedding_dim: int = 300
    n_features: int = N_FEATURES
    hidden_size: int = 100
    mlp_width: int = 100
    mlp_depth: int = 3
    dropout: float = 0.5
    batch_norm: bool = True

    def __post_init__(self):
        for name in ("embedding_dim", "n_features", "hidden_size", "mlp_width", "mlp_depth"):
            if int(getattr(self, name)) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")

    def to_dict(self):
        return asdict(self)


class SpecNet(nn.Module):
    """Final forward/backward LSTM states, concatenated with shallow features, then an MLP.

    Each hidden layer is Linear -> BatchNorm -> ReLU -> Dropout; the head is a
    single logit squashed by a sigmoid.
    """

    def __init__(self, config: NetworkConfig):
        super().__init__()
        self.config = config
        self.lstm = nn.LSTM(config.embedding_dim, config.hidden_size,
                            batch_first=True, bidirectional=True)
        self.rep_dropout = nn.Dropout(config.dropout)
        layers = []
        width = 2 * config.hidden_size + config.n_features
        for _ in range(config.mlp_depth):
            layers.append(nn.Linear(width, config.mlp_width))
            if config.batch_norm:
                layers.append(nn.BatchNorm1d(config.mlp_width))
            layers.append(nn.ReLU())
            layers.append(nn.Dropout(config.dropout))
            width = config.mlp_width
        self.mlp = nn.Sequential(*layers)
        self.out = nn.Linear(width, 1)

    def encode(self, embedded, lengths):
        packed = pack_padded_sequence(embedded, lengths.cpu(), batch_first=True,
                                      enforce_sorted=False)
        _, (h_n, _) = self.lstm(packed)
        # h_n: (2, B, H) -> final forward state, final backward state
        return torch.cat([h_n[0], h_n[1]], dim=1)

    def logits(self, embedded, lengths, feats):
        if embedded.shape[-1] != self.config.embedding_dim:
            raise DimensionMismatch(
                f"embedding width {embedded.shape[-1]} != {self.config.embedding_dim}")
        if feats.shape[-1] != self.config.n_features:
            raise DimensionMismatch(
                f"feature width {feats.shape[-1]} != {self.config.n_features}")
        if embedded.shape[0] != feats.shape[0] or embedded.shape[0] != lengths.shape[0]:
            raise DimensionMismatch("batch sizes of sequences, lengths and features differ")
        if (lengths < 1).any():
            raise ValueError("every sequence needs at least one token")
        rep = self.rep_dropout(self.encode(embedded, lengths))
        h = self.mlp(torch.cat([rep, feats], dim=1))
        return self.out(h).squeeze(1)

    def forward(self, embedded, lengths, feats):
        return torch.sigmoid(self.logits(embedded, lengths, feats))

    @property
    def dtype(self):
        return self.out.weight.dtype


def collate(sequences: Sequence, feats, dtype=torch.float32):
    """Pad a list of (L_i, D) arrays into a (B, T, D) tensor plus lengths and feature tensor."""
    seqs = [torch.as_tensor(np.asarray(s), dtype=dtype) for s in sequences]
    lengths = torch.tensor([s.shape[0] for s in seqs], dtype=torch.int64)
    padded = pad_sequence(seqs, batch_first=True)
    return padded, lengths, torch.as_tensor(np.asarray(feats), dtype=dtype)


def forward(model: SpecNet, sequences, feats, mode="eval"):
    """Score a batch given per-sentence embedding arrays and standardized features.

    ``mode="train"`` enables dropout and batch statistics (and updates the
    batch-norm running averages); ``"eval"`` is deterministic.
    """
    if mode not in ("train", "eval"):
        raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
    was_training = model.training
    model.train(mode == "train")
    try:
        x, lengths, f = collate(sequences, feats, dtype=model.dtype)
        return model(x, lengths, f)
    finally:
        model.train(was_training)


def init_params(config: NetworkConfig, seed: int, dtype=torch.float32) -> SpecNet:
    """Build a fresh network with Glorot-uniform weights, reproducible from ``seed``."""
    gen = torch.Generator().manual_seed(int(seed))
    model = SpecNet(config)
    with torch.no_grad():
        for name, p in model.named_parameters():
            if "bias" in name:
                p.zero_()
            elif p.dim() >= 2:
                nn.init.xavier_uniform_(p, generator=gen)
            else:
                # batch-norm scale
                p.fill_(1.0)
    return model.to(dtype)


def clone_params(model: SpecNet) -> SpecNet:
    return copy.deepcopy(model)


def param_state(model: nn.Module) -> dict:
    """All trainable parameters and float buffers (batch-norm running stats) by name."""
    state = dict(model.named_parameters())
    state.update((k, b) for k, b in model.named_buffers() if b.is_floating_point())
    return state
