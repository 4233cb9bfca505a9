"""Stochastic noise applied to embedded sentences and their shallow features."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

RANDOM_VECTOR = "random_vector"
ZERO_VECTOR = "zero_vector"


@dataclass
class NoiseConfig:
    emb_gauss_std: float = 0.1
    feat_gauss_std: float = 0.2
    word_drop_prob: float = 0.15
    word_subst_prob: float = 0.15
    subst_mode: str = RANDOM_VECTOR
    target_perturb_fraction: float = 0.5

    def __post_init__(self):
        for name in ("word_drop_prob", "word_subst_prob", "target_perturb_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        for name in ("emb_gauss_std", "feat_gauss_std"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.subst_mode not in (RANDOM_VECTOR, ZERO_VECTOR):
            raise ValueError(f"unknown subst_mode {self.subst_mode!r}")

    @classmethod
    def zero(cls):
        return cls(0.0, 0.0, 0.0, 0.0, ZERO_VECTOR, 0.0)

    def to_dict(self):
        return asdict(self)


@dataclass
class PerturbationPlan:
    """Per-position boolean masks; drop, substitute and jitter are mutually exclusive."""

    eligible: np.ndarray
    drop: np.ndarray
    substitute: np.ndarray
    jitter: np.ndarray

    @property
    def keep(self):
        return ~self.drop


def plan_perturbation(length: int, cfg: NoiseConfig, rng: np.random.Generator) -> PerturbationPlan:
    if length < 1:
        raise ValueError("sentence must have at least one token")
    eligible = rng.random(length) < cfg.target_perturb_fraction
    drop = eligible & (rng.random(length) < cfg.word_drop_prob)
    substitute = eligible & ~drop & (rng.random(length) < cfg.word_subst_prob)
    if drop.all():
        drop[rng.integers(length)] = False
    jitter = eligible & ~drop & ~substitute
    return PerturbationPlan(eligible, drop, substitute, jitter)


def augment(embedded, feats, cfg: NoiseConfig, rng: np.random.Generator, plan=None):
    """Return a perturbed copy of ``(embedded, feats)``; inputs are never modified.

    ``embedded`` is an (L, D) array of word vectors, ``feats`` the standardized
    feature vector. Dropped words are removed from the sequence, so the output
    may be shorter but always keeps at least one word.
    """
    embedded = np.asarray(embedded, dtype=np.float64)
    feats = np.asarray(feats, dtype=np.float64)
    if plan is None:
        plan = plan_perturbation(embedded.shape[0], cfg, rng)
    out = embedded.copy()
    n_sub = int(plan.substitute.sum())
    if n_sub:
        if cfg.subst_mode == ZERO_VECTOR:
            out[plan.substitute] = 0.0
        else:
            out[plan.substitute] = rng.normal(0.0, cfg.emb_gauss_std, (n_sub, out.shape[1]))
    n_jit = int(plan.jitter.sum())
    if n_jit and cfg.emb_gauss_std > 0:
        out[plan.jitter] += rng.normal(0.0, cfg.emb_gauss_std, (n_jit, out.shape[1]))
    out = out[plan.keep]
    if cfg.feat_gauss_std > 0:
        feats = feats + rng.normal(0.0, cfg.feat_gauss_std, feats.shape)
    else:
        feats = feats.copy()
    return out, feats
