"""Student/teacher self-ensembling with posterior-distribution regularization."""

from __future__ import annotations

import logging
import math
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field, fields
from typing import Iterator, Optional, Sequence

import numpy as np
import torch

from .augment import NoiseConfig, augment
from .checkpoint import Checkpoint
from .corpusio import (
    EmbeddingTable,
    LabeledExample,
    LexiconResources,
    ReferenceDistribution,
    as_sentence,
    compute_idf,
)
from .exceptions import DimensionMismatch, DivergenceError, EmptyCorpus
from .features import FeatureStats, feature_matrix, standardize_features
from .losses import (
    consistency_loss,
    kl_reg_loss,
    meanstd_reg_loss,
    posterior_stats,
    supervised_loss,
    total_loss,
)
from .metrics import evaluate
from .network import NetworkConfig, SpecNet, clone_params, collate, init_params, param_state

logger = logging.getLogger(__name__)

VARIANTS = ("se", "se_d", "se_a", "se_ad_kl", "se_ad_meanstd", "se_ad_noaug")
DEFAULT_EPOCHS = {"se": 10, "se_d": 15, "se_a": 30, "se_ad_kl": 30, "se_ad_meanstd": 30,
                  "se_ad_noaug": 30}
KL_C2 = 10.0
MEANSTD_C2 = 100.0


def normalize_variant(name: str) -> str:
    """Accept spellings like ``SE+AD_kl``, ``se-ad-kl`` or ``se_ad_kl``."""
    key = name.strip().lower().replace("+", "_").replace("-", "_").replace(" ", "_")
    key = key.replace("mean_std", "meanstd").replace("no_aug", "noaug")
    if key not in VARIANTS:
        raise ValueError(f"unknown variant {name!r}; choose from {', '.join(VARIANTS)}")
    return key


@dataclass
class TrainingConfig:
    variant: str = "se_ad_meanstd"
    alpha: float = 0.999
    c1: float = 1000.0
    c2: Optional[float] = None  # None -> 10 for KL, 100 for mean-std
    beta: float = 1.0
    batch_size: int = 32
    epochs: Optional[int] = None  # None -> per-variant default
    lr: float = 1e-4
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    mu_r: float = 0.417
    sigma_r: float = 0.227
    seed: int = 0
    dtype: str = "float32"
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    network: NetworkConfig = field(default_factory=NetworkConfig)

    def __post_init__(self):
        self.variant = normalize_variant(self.variant)
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.c1 < 0 or (self.c2 is not None and self.c2 < 0):
            raise ValueError("loss weights must be nonnegative")
        if self.epochs is not None and self.epochs < 0:
            raise ValueError("epochs must be nonnegative")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if self.dtype not in ("float32", "float64"):
            raise ValueError("dtype must be float32 or float64")
        ReferenceDistribution(self.mu_r, self.sigma_r)

    # variant gating
    @property
    def reference(self):
        return ReferenceDistribution(self.mu_r, self.sigma_r)

    @property
    def reg_kind(self):
        if self.variant in ("se", "se_a"):
            return None
        return "kl" if self.variant == "se_ad_kl" else "meanstd"

    @property
    def effective_c1(self):
        return 0.0 if self.variant in ("se", "se_d") else float(self.c1)

    @property
    def effective_c2(self):
        kind = self.reg_kind
        if kind is None:
            return 0.0
        if self.c2 is not None:
            return float(self.c2)
        return KL_C2 if kind == "kl" else MEANSTD_C2

    @property
    def n_epochs(self):
        return DEFAULT_EPOCHS[self.variant] if self.epochs is None else int(self.epochs)

    @property
    def uses_target(self):
        return self.variant != "se"

    @property
    def uses_augmentation(self):
        return self.variant in ("se_a", "se_ad_kl", "se_ad_meanstd")

    @property
    def torch_dtype(self):
        return torch.float64 if self.dtype == "float64" else torch.float32

    def to_flat(self) -> dict:
        flat = {f.name: getattr(self, f.name) for f in fields(self)
                if f.name not in ("noise", "network")}
        flat.update(asdict(self.noise))
        net = asdict(self.network)
        net.pop("embedding_dim")
        net.pop("n_features")
        flat.update(net)
        return flat

    @classmethod
    def from_flat(cls, flat: dict) -> "TrainingConfig":
        flat = dict(flat)
        noise_keys = {f.name for f in fields(NoiseConfig)}
        net_keys = {f.name for f in fields(NetworkConfig)}
        noise = NoiseConfig(**{k: flat.pop(k) for k in list(flat) if k in noise_keys})
        network = NetworkConfig(**{k: flat.pop(k) for k in list(flat) if k in net_keys})
        unknown = set(flat) - {f.name for f in fields(cls)}
        if unknown:
            raise ValueError(f"unknown training options: {', '.join(sorted(unknown))}")
        return cls(noise=noise, network=network, **flat)


@dataclass
class LossBreakdown:
    l_ce: float
    l_u: float
    l_d: float
    total: float
    mu_p: float = float("nan")
    sigma_p: float = float("nan")


@dataclass
class Counters:
    """How often each expensive path ran; used to check variant gating."""

    steps: int = 0
    augment_calls: int = 0
    student_forwards: int = 0
    teacher_forwards: int = 0
    target_forwards: int = 0


@dataclass
class EncodedCorpus:
    token_ids: list
    feats: np.ndarray
    labels: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.token_ids)


@dataclass
class Batch:
    source: list
    target: list


def ema_update(teacher: torch.nn.Module, student: torch.nn.Module, alpha: float):
    """Move every teacher parameter and batch-norm statistic towards the student's.

    ``theta <- alpha * theta + (1 - alpha) * phi``; the student is left untouched.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    t_state, s_state = param_state(teacher), param_state(student)
    if t_state.keys() != s_state.keys():
        raise DimensionMismatch("teacher and student have different parameter sets")
    with torch.no_grad():
        for name, theta in t_state.items():
            phi = s_state[name]
            if theta.shape != phi.shape:
                raise DimensionMismatch(f"{name}: {tuple(theta.shape)} vs {tuple(phi.shape)}")
            theta.mul_(alpha).add_(phi, alpha=1.0 - alpha)
    return teacher


@contextmanager
def teacher_mode(model: torch.nn.Module, dropout: bool):
    """Run ``model`` on batch statistics without touching its running averages.

    Dropout stays active only if ``dropout`` is true.
    """
    saved = []
    for m in model.modules():
        if isinstance(m, torch.nn.modules.batchnorm._BatchNorm):
            saved.append((m, m.training, m.track_running_stats))
            m.train(True)
            m.track_running_stats = False
        elif isinstance(m, torch.nn.Dropout):
            saved.append((m, m.training, None))
            m.train(dropout)
    try:
        yield model
    finally:
        for m, training, track in saved:
            m.train(training)
            if track is not None:
                m.track_running_stats = track


def make_batches(source: Sequence, target: Sequence, batch_size: int,
                 rng: np.random.Generator) -> Iterator[Batch]:
    """One epoch of batches: a pass over a shuffled source, paired with an equally
    sized slice of a shuffled, cycled target stream.

    A trailing single-item source batch is dropped when ``batch_size > 1``
    because batch statistics need at least two rows.
    """
    n_src, n_tgt = len(source), len(target)
    if n_src == 0:
        raise EmptyCorpus("no source sentences to train on")
    src_order = rng.permutation(n_src)
    tgt_order = np.empty(0, dtype=np.int64)
    tgt_pos = 0
    for start in range(0, n_src, batch_size):
        idx = src_order[start:start + batch_size]
        if len(idx) == 1 and batch_size > 1:
            break
        tgt = []
        if n_tgt:
            need = len(idx)
            while len(tgt_order) - tgt_pos < need:
                tgt_order = np.concatenate([tgt_order[tgt_pos:], rng.permutation(n_tgt)])
                tgt_pos = 0
            tgt = [target[i] for i in tgt_order[tgt_pos:tgt_pos + need]]
            tgt_pos += need
        yield Batch(source=[source[i] for i in idx], target=tgt)


def encode_corpus(sentences, embeddings: EmbeddingTable, lexicons: LexiconResources,
                  stats: FeatureStats, labels=None) -> EncodedCorpus:
    sentences = [as_sentence(s) for s in sentences]
    ids = [embeddings.encode(s.tokens) for s in sentences]
    feats = standardize_features(feature_matrix(sentences, lexicons), stats)
    lab = None if labels is None else np.asarray(labels, dtype=np.float64)
    return EncodedCorpus(ids, feats, lab)


class Trainer:
    """Holds the student, teacher and optimizer for one training run."""

    def __init__(self, cfg: TrainingConfig, embeddings: EmbeddingTable,
                 network_config: Optional[NetworkConfig] = None):
        self.cfg = cfg
        self.embeddings = embeddings
        self.emb_matrix = embeddings.matrix
        net_cfg = network_config or NetworkConfig(**{**asdict(cfg.network),
                                                     "embedding_dim": embeddings.dimension})
        self.student = init_params(net_cfg, cfg.seed, dtype=cfg.torch_dtype)
        self.teacher = clone_params(self.student)
        for p in self.teacher.parameters():
            p.requires_grad_(False)
        self.optimizer = torch.optim.Adam(self.student.parameters(), lr=cfg.lr,
                                          betas=(cfg.adam_beta1, cfg.adam_beta2))
        seeds = np.random.SeedSequence(cfg.seed).spawn(3)
        self.batch_rng = np.random.default_rng(seeds[0])
        self.student_rng = np.random.default_rng(seeds[1])
        self.teacher_rng = np.random.default_rng(seeds[2])
        self.counters = Counters()

    def _inputs(self, corpus: EncodedCorpus, idx, rng, noisy):
        seqs, feats = [], []
        for i in idx:
            emb = self.emb_matrix[corpus.token_ids[i]]
            f = corpus.feats[i]
            if noisy:
                emb, f = augment(emb, f, self.cfg.noise, rng)
                self.counters.augment_calls += 1
            seqs.append(emb)
            feats.append(f)
        return seqs, np.array(feats)

    def _batch_inputs(self, source, target, batch, rng, noisy):
        seqs, feats = self._inputs(source, batch.source, rng, noisy)
        if self.cfg.uses_target and batch.target:
            t_seqs, t_feats = self._inputs(target, batch.target, rng, noisy)
            seqs = seqs + t_seqs
            feats = np.concatenate([feats, t_feats])
            self.counters.target_forwards += 1
        return collate(seqs, feats, dtype=self.cfg.torch_dtype)

    def step(self, source: EncodedCorpus, target: Optional[EncodedCorpus], batch: Batch
             ) -> LossBreakdown:
        cfg = self.cfg
        c1, c2 = cfg.effective_c1, cfg.effective_c2
        noisy = cfg.uses_augmentation
        n_src = len(batch.source)

        x, lengths, f = self._batch_inputs(source, target, batch, self.student_rng, noisy)
        self.student.train()
        preds = self.student(x, lengths, f)
        self.counters.student_forwards += 1
        labels = torch.as_tensor(source.labels[batch.source], dtype=preds.dtype)
        l_ce = supervised_loss(preds[:n_src], labels)

        zero = preds.new_zeros(())
        l_u = zero
        if c1 > 0:
            xt, lt, ft = self._batch_inputs(source, target, batch, self.teacher_rng, noisy)
            with torch.no_grad(), teacher_mode(self.teacher, dropout=False):
                t_preds = self.teacher(xt, lt, ft)
            self.counters.teacher_forwards += 1
            l_u = consistency_loss(preds, t_preds)

        stats = posterior_stats(preds) if preds.shape[0] >= 2 else None
        l_d = zero
        if c2 > 0:
            if cfg.reg_kind == "kl":
                l_d = kl_reg_loss(stats, cfg.reference)
            else:
                l_d = meanstd_reg_loss(stats, cfg.reference, cfg.beta)

        loss = total_loss(l_ce, l_u, l_d, c1, c2)
        parts = LossBreakdown(
            l_ce=l_ce.item(), l_u=l_u.item(), l_d=l_d.item(), total=0.0,
            mu_p=stats.mu_p.item() if stats is not None else float("nan"),
            sigma_p=stats.sigma_p.item() if stats is not None else float("nan"),
        )
        parts.total = total_loss(parts.l_ce, parts.l_u, parts.l_d, c1, c2)
        if not torch.isfinite(loss) or not math.isfinite(parts.total):
            raise DivergenceError(
                f"non-finite loss at step {self.counters.steps}: {parts}",
                diagnostics={"step": self.counters.steps, **asdict(parts)})

        self.optimizer.zero_grad()
        loss.backward()
        self.optimizer.step()
        ema_update(self.teacher, self.student, cfg.alpha)
        self.counters.steps += 1
        return parts

    def predict(self, corpus: EncodedCorpus, batch_size: int = 256, model=None) -> np.ndarray:
        model = self.teacher if model is None else model
        return predict_encoded(model, self.emb_matrix, corpus, batch_size)


def predict_encoded(model: SpecNet, emb_matrix, corpus: EncodedCorpus, batch_size=256):
    model.eval()
    out = []
    with torch.no_grad():
        for start in range(0, len(corpus), batch_size):
            idx = range(start, min(start + batch_size, len(corpus)))
            x, lengths, f = collate([emb_matrix[corpus.token_ids[i]] for i in idx],
                                    corpus.feats[list(idx)], dtype=model.dtype)
            out.append(model(x, lengths, f).double().numpy())
    return np.concatenate(out) if out else np.empty(0)


def train_step(trainer: Trainer, source, target, batch) -> LossBreakdown:
    return trainer.step(source, target, batch)


def _check_source(source):
    out = []
    for ex in source:
        if not isinstance(ex, LabeledExample):
            raise TypeError("source must be a sequence of LabeledExample")
        if ex.kind != "binary":
            raise ValueError("source examples must carry binary labels")
        out.append(ex)
    if not out:
        raise EmptyCorpus("no source sentences to train on")
    return out


def prepare_lexicons(lexicons: Optional[LexiconResources], source_sentences,
                     target_sentences) -> LexiconResources:
    """Fill in an idf table from the unlabeled target sentences when none was supplied.

    Falls back to the source sentences if there is no target corpus.
    """
    lexicons = lexicons if lexicons is not None else LexiconResources()
    if lexicons.idf is None:
        idf = compute_idf(list(target_sentences) or list(source_sentences))
        lexicons = LexiconResources(**{**lexicons.__dict__, "idf": idf})
    return lexicons


def train(source, target, cfg: TrainingConfig, embeddings: EmbeddingTable,
          lexicons: Optional[LexiconResources] = None, dev=None, epoch_callback=None,
          return_trainer=False):
    """Train per ``cfg`` and return a :class:`Checkpoint`.

    ``source`` holds binary :class:`LabeledExample` items, ``target`` unlabeled
    sentences (str or Sentence) and ``dev`` optional real-labeled examples
    whose metrics are logged every epoch.
    """
    source = _check_source(source)
    target = [as_sentence(s) for s in (target or [])]
    src_sentences = [ex.sentence for ex in source]
    lexicons = prepare_lexicons(lexicons, src_sentences, target)
    stats = FeatureStats.fit(feature_matrix(src_sentences, lexicons))
    src = encode_corpus(src_sentences, embeddings, lexicons, stats,
                        labels=[ex.label for ex in source])
    tgt = encode_corpus(target, embeddings, lexicons, stats) if target else None
    dev_enc = None
    if dev:
        dev_enc = encode_corpus([ex.sentence for ex in dev], embeddings, lexicons, stats,
                                labels=[ex.label for ex in dev])
    if cfg.effective_c2 > 0 and cfg.batch_size < 2 and not target:
        raise ValueError("distribution loss needs batch_size >= 2")

    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(cfg.seed)
        trainer = Trainer(cfg, embeddings)
        history = []
        tgt_idx = range(len(tgt)) if (tgt is not None and cfg.uses_target) else range(0)
        for epoch in range(1, cfg.n_epochs + 1):
            parts = [trainer.step(src, tgt, b)
                     for b in make_batches(range(len(src)), tgt_idx, cfg.batch_size,
                                           trainer.batch_rng)]
            row = {"epoch": epoch}
            for k in ("l_ce", "l_u", "l_d", "total", "mu_p", "sigma_p"):
                row[k] = float(np.mean([getattr(p, k) for p in parts])) if parts else float("nan")
            if dev_enc is not None:
                pred = trainer.predict(dev_enc)
                try:
                    m = evaluate(pred, dev_enc.labels)
                except ValueError:
                    m = {"spearman": float("nan"), "kendall_tau": float("nan"),
                         "mae": float(np.mean(np.abs(pred - dev_enc.labels)))}
                row.update(dev_spearman=m["spearman"], dev_tau=m["kendall_tau"],
                           dev_mae=m["mae"])
            history.append(row)
            logger.info("epoch %d: %s", epoch,
                        " ".join(f"{k}={v:.4g}" for k, v in row.items() if k != "epoch"))
            if epoch_callback is not None:
                epoch_callback(row, trainer)

    ckpt = Checkpoint.from_training(trainer, cfg, stats, lexicons, embeddings, history)
    return (ckpt, trainer) if return_trainer else ckpt


def predict(checkpoint: Checkpoint, sentences, embeddings: EmbeddingTable,
            batch_size: int = 256) -> np.ndarray:
    """Teacher-network scores in (0, 1), eval mode, no noise."""
    checkpoint.check_embeddings(embeddings)
    sentences = [as_sentence(s) for s in sentences]
    if not sentences:
        return np.empty(0)
    corpus = encode_corpus(sentences, embeddings, checkpoint.lexicons, checkpoint.feature_stats)
    return predict_encoded(checkpoint.teacher(), embeddings.matrix, corpus, batch_size)
