"""Model checkpoint container.

A checkpoint is a ``torch.save`` archive holding one plain dict:

    format            "specadapt-checkpoint"
    version           integer, currently 1
    network_config    NetworkConfig fields
    training_config   flat TrainingConfig fields
    student, teacher  state dicts (parameters and batch-norm buffers)
    optimizer         Adam state dict
    feature_stats     {"mean": [...], "std": [...]}
    lexicons          LexiconResources.to_dict(), including the idf table
    vocab_hash        sha256 of the embedding vocabulary and vectors
    history           list of per-epoch loss/metric dicts

Only tensors and builtin containers are stored, so it loads with
``torch.load(..., weights_only=True)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import torch

from .corpusio import EmbeddingTable, LexiconResources
from .exceptions import ModelStateError
from .features import FeatureStats
from .network import NetworkConfig, SpecNet

FORMAT = "specadapt-checkpoint"
VERSION = 1


@dataclass
class Checkpoint:
    network_config: NetworkConfig
    training_config: dict
    student_state: dict
    teacher_state: dict
    feature_stats: FeatureStats
    lexicons: LexiconResources
    vocab_hash: str
    optimizer_state: dict = field(default_factory=dict)
    history: list = field(default_factory=list)

    @classmethod
    def from_training(cls, trainer, cfg, stats, lexicons, embeddings, history):
        return cls(
            network_config=trainer.student.config,
            training_config=cfg.to_flat(),
            student_state={k: v.detach().clone() for k, v in trainer.student.state_dict().items()},
            teacher_state={k: v.detach().clone() for k, v in trainer.teacher.state_dict().items()},
            feature_stats=stats,
            lexicons=lexicons,
            vocab_hash=embeddings.vocab_hash(),
            optimizer_state=trainer.optimizer.state_dict(),
            history=list(history),
        )

    def _build(self, state):
        model = SpecNet(self.network_config)
        dtype = next(v.dtype for v in state.values() if v.is_floating_point())
        model.to(dtype)
        model.load_state_dict(state)
        model.eval()
        return model

    def teacher(self) -> SpecNet:
        return self._build(self.teacher_state)

    def student(self) -> SpecNet:
        return self._build(self.student_state)

    def check_embeddings(self, embeddings: EmbeddingTable):
        if embeddings.dimension != self.network_config.embedding_dim:
            raise ModelStateError(
                f"embeddings have dimension {embeddings.dimension}, "
                f"model expects {self.network_config.embedding_dim}")
        if embeddings.vocab_hash() != self.vocab_hash:
            raise ModelStateError("embedding vocabulary does not match the one used in training")

    def to_dict(self):
        return {
            "format": FORMAT,
            "version": VERSION,
            "network_config": self.network_config.to_dict(),
            "training_config": dict(self.training_config),
            "student": self.student_state,
            "teacher": self.teacher_state,
            "optimizer": self.optimizer_state,
            "feature_stats": self.feature_stats.to_dict(),
            "lexicons": self.lexicons.to_dict(),
            "vocab_hash": self.vocab_hash,
            "history": self.history,
        }

    def save(self, path):
        torch.save(self.to_dict(), path)

    @classmethod
    def load(cls, path) -> "Checkpoint":
        try:
            d = torch.load(path, map_location="cpu", weights_only=True)
        except FileNotFoundError:
            raise
        except Exception as e:
            raise ModelStateError(f"cannot read checkpoint {path}: {e}") from e
        if not isinstance(d, dict) or d.get("format") != FORMAT:
            raise ModelStateError(f"{path} is not a specadapt checkpoint")
        if d.get("version") != VERSION:
            raise ModelStateError(f"unsupported checkpoint version {d.get('version')}")
        return cls(
            network_config=NetworkConfig(**d["network_config"]),
            training_config=d["training_config"],
            student_state=d["student"],
            teacher_state=d["teacher"],
            feature_stats=FeatureStats.from_dict(d["feature_stats"]),
            lexicons=LexiconResources.from_dict(d["lexicons"]),
            vocab_hash=d["vocab_hash"],
            optimizer_state=d.get("optimizer", {}),
            history=d.get("history", []),
        )
