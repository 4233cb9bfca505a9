"""Loss terms: supervised cross-entropy, student/teacher consistency and the
posterior-distribution regularizers.

All functions accept tensors or array-likes and return 0-d tensors, so they
can be differentiated with autograd when fed student predictions.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch

from .corpusio import ReferenceDistribution
from .exceptions import DimensionMismatch, EmptyBatch, InsufficientBatch

SIGMA_FLOOR = 1e-4
LOG_FLOOR = 1e-12


def _t(x):
    if isinstance(x, torch.Tensor):
        return x
    return torch.as_tensor(x, dtype=torch.float64)


@dataclass
class BatchPosteriorStats:
    mu_p: torch.Tensor
    sigma_p: torch.Tensor
    n: int


def posterior_stats(preds) -> BatchPosteriorStats:
    """Batch mean and unbiased standard deviation (floored at ``SIGMA_FLOOR``)."""
    preds = _t(preds).reshape(-1)
    n = preds.shape[0]
    if n < 2:
        raise InsufficientBatch(f"need at least 2 predictions, got {n}")
    mu = preds.mean()
    var = ((preds - mu) ** 2).sum() / (n - 1)
    # floor the variance before the sqrt so the gradient stays finite at zero spread
    sigma = torch.sqrt(torch.clamp(var, min=SIGMA_FLOOR ** 2))
    return BatchPosteriorStats(mu, sigma, n)


def _stats(stats_or_preds):
    if isinstance(stats_or_preds, BatchPosteriorStats):
        if stats_or_preds.n < 2:
            raise InsufficientBatch(f"need at least 2 predictions, got {stats_or_preds.n}")
        return stats_or_preds
    return posterior_stats(stats_or_preds)


def consistency_loss(f_stu, f_tea) -> torch.Tensor:
    f_stu, f_tea = _t(f_stu), _t(f_tea)
    if f_stu.shape != f_tea.shape:
        raise DimensionMismatch(f"student {tuple(f_stu.shape)} vs teacher {tuple(f_tea.shape)}")
    if f_stu.numel() == 0:
        raise EmptyBatch("consistency loss on an empty batch")
    return ((f_stu - f_tea) ** 2).mean()


def supervised_loss(f_stu, labels) -> torch.Tensor:
    """Mean binary cross-entropy with log arguments floored at 1e-12."""
    f_stu = _t(f_stu)
    labels = _t(labels).to(f_stu.dtype)
    if f_stu.numel() == 0:
        raise EmptyBatch("cross-entropy on an empty batch")
    if f_stu.shape != labels.shape:
        raise DimensionMismatch(f"predictions {tuple(f_stu.shape)} vs labels {tuple(labels.shape)}")
    pos = torch.log(torch.clamp(f_stu, min=LOG_FLOOR))
    neg = torch.log(torch.clamp(1.0 - f_stu, min=LOG_FLOOR))
    return -(labels * pos + (1.0 - labels) * neg).mean()


def kl_reg_loss(stats, ref: ReferenceDistribution = ReferenceDistribution()) -> torch.Tensor:
    """KL(r || p) between the reference Gaussian r and the batch Gaussian p."""
    s = _stats(stats)
    mu_p, sigma_p = _t(s.mu_p), torch.clamp(_t(s.sigma_p), min=SIGMA_FLOOR)
    return (torch.log(sigma_p / ref.sigma_r)
            + (ref.sigma_r ** 2 + (ref.mu_r - mu_p) ** 2) / (2.0 * sigma_p ** 2)
            - 0.5)


def meanstd_reg_loss(stats, ref: ReferenceDistribution = ReferenceDistribution(),
                     beta: float = 1.0) -> torch.Tensor:
    s = _stats(stats)
    return torch.abs(ref.sigma_r - _t(s.sigma_p)) + beta * torch.abs(ref.mu_r - _t(s.mu_p))


def total_loss(l_ce, l_u, l_d, c1, c2):
    return l_ce + c1 * l_u + c2 * l_d

