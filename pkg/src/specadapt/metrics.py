"""Evaluation of real-valued predictions: rank correlations, MAE, histograms."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .exceptions import DimensionMismatch, EmptyBatch, UndefinedCorrelation


def _pair(pred, gold, min_len=1):
    pred = np.asarray(pred, dtype=np.float64).reshape(-1)
    gold = np.asarray(gold, dtype=np.float64).reshape(-1)
    if pred.shape != gold.shape:
        raise DimensionMismatch(f"{pred.shape[0]} predictions vs {gold.shape[0]} gold values")
    if pred.shape[0] < min_len:
        raise DimensionMismatch(f"need at least {min_len} values, got {pred.shape[0]}")
    return pred, gold


def mae(pred, gold) -> float:
    pred, gold = _pair(pred, gold)
    return float(np.mean(np.abs(pred - gold)))


def _check_untied(pred, gold):
    for name, v in (("predictions", pred), ("gold", gold)):
        if np.all(v == v[0]):
            raise UndefinedCorrelation(f"all {name} are tied; correlation is undefined")


def kendall_tau(pred, gold) -> float:
    """Tie-corrected Kendall tau-b."""
    pred, gold = _pair(pred, gold, 2)
    _check_untied(pred, gold)
    return float(stats.kendalltau(pred, gold, variant="b").statistic)


def spearman(pred, gold) -> float:
    """Pearson correlation of average ranks."""
    pred, gold = _pair(pred, gold, 2)
    _check_untied(pred, gold)
    return float(stats.spearmanr(pred, gold).statistic)


def evaluate(pred, gold) -> dict:
    return {
        "spearman": spearman(pred, gold),
        "kendall_tau": kendall_tau(pred, gold),
        "mae": mae(pred, gold),
    }


@dataclass
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    mean: float
    std: float

    def density(self, x):
        if not self.std > 0:
            return np.where(np.isclose(x, self.mean), np.inf, 0.0)
        z = (np.asarray(x) - self.mean) / self.std
        return np.exp(-0.5 * z * z) / (self.std * math.sqrt(2 * math.pi))

    def rows(self):
        centers = 0.5 * (self.edges[:-1] + self.edges[1:])
        dens = self.density(centers)
        for lo, hi, c, d in zip(self.edges[:-1], self.edges[1:], self.counts, dens):
            yield float(lo), float(hi), int(c), float(d)


def histogram(pred, bins: int = 10) -> Histogram:
    """Equal-width bins over [0, 1] (last bin closed) plus a fitted Gaussian."""
    pred = np.asarray(pred, dtype=np.float64).reshape(-1)
    if pred.size == 0:
        raise EmptyBatch("histogram of an empty prediction list")
    if int(bins) < 1:
        raise ValueError("bins must be at least 1")
    if np.any((pred < 0) | (pred > 1)) or not np.all(np.isfinite(pred)):
        raise ValueError("histogram values must lie in [0, 1]")
    counts, edges = np.histogram(pred, bins=int(bins), range=(0.0, 1.0))
    std = float(pred.std(ddof=1)) if pred.size > 1 else 0.0
    return Histogram(edges=edges, counts=counts, mean=float(pred.mean()), std=std)


def write_report(path, metrics: dict, n: int) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(("metric", "value", "n"))
        for k, v in metrics.items():
            w.writerow((k, f"{v:.6f}", n))


def write_histogram_csv(path, hist: Histogram) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("bin_left", "bin_right", "count", "gaussian_density_at_center"))
        for lo, hi, c, d in hist.rows():
            w.writerow((f"{lo:.6g}", f"{hi:.6g}", c, f"{d:.6g}"))
