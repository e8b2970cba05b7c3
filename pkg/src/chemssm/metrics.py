"""Evaluation metrics with exact, brute-force-checkable tie handling.

Conventions: ROC-AUC gives half credit to score ties (Mann-Whitney);
PR-AUC is average precision with tied scores processed as one threshold
block; Spearman assigns average ranks to ties and takes the Pearson
correlation of the ranks. MAE is reported on the raw label scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class DegenerateLabelsError(ValueError):
    pass


class NoPositivesError(ValueError):
    pass


class ZeroVarianceError(ValueError):
    pass


class MixedMetricsError(ValueError):
    pass


METRIC_NAMES = ("roc_auc", "pr_auc", "mae", "spearman")

# Direction: +1 when larger is better, -1 when smaller is better.
METRIC_DIRECTION = {"roc_auc": 1, "pr_auc": 1, "spearman": 1, "mae": -1}


@dataclass(frozen=True)
class MetricReport:
    metric: str
    value: float
    n: int
    seed: int = -1

    def __post_init__(self):
        if self.metric not in METRIC_NAMES:
            raise ValueError(f"unknown metric {self.metric!r}")

    def line(self, dataset: str) -> str:
        return f"{dataset}\t{self.metric}\t{self.seed}\t{self.value:.6f}"


def _as_arrays(scores, labels, op: str) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError(f"{op}: need equal-length 1-d arrays, got {s.shape} and {y.shape}")
    return s, y


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties sharing the mean of their positional ranks."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def roc_auc(scores: Sequence[float], labels: Sequence[float]) -> float:
    """Mann-Whitney statistic: P(score_pos > score_neg) + 0.5 P(tie)."""
    s, y = _as_arrays(scores, labels, "roc_auc")
    pos = int((y == 1).sum())
    neg = int((y == 0).sum())
    if pos == 0 or neg == 0:
        raise DegenerateLabelsError(f"need both classes, got {pos} positives / {neg} negatives")
    ranks = _average_ranks(s)
    rank_sum = ranks[y == 1].sum()
    u = rank_sum - pos * (pos + 1) / 2.0
    return float(u / (pos * neg))


def pr_auc(scores: Sequence[float], labels: Sequence[float]) -> float:
    """Average precision over descending unique thresholds, ties as one block."""
    s, y = _as_arrays(scores, labels, "pr_auc")
    total_pos = int((y == 1).sum())
    if total_pos == 0:
        raise NoPositivesError("average precision needs at least one positive")
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    ap = 0.0
    tp = fp = 0
    last_recall = 0.0
    i = 0
    n = len(s)
    while i < n:
        j = i
        while j + 1 < n and s[j + 1] == s[i]:
            j += 1
        tp += int(y[i : j + 1].sum())
        fp += (j - i + 1) - int(y[i : j + 1].sum())
        recall = tp / total_pos
        precision = tp / (tp + fp)
        ap += (recall - last_recall) * precision
        last_recall = recall
        i = j + 1
    return float(ap)


def mae(preds: Sequence[float], labels: Sequence[float]) -> float:
    p, y = _as_arrays(preds, labels, "mae")
    if len(p) == 0:
        raise ValueError("mae of empty arrays")
    return float(np.abs(p - y).mean())


def spearman(preds: Sequence[float], labels: Sequence[float]) -> float:
    """Pearson correlation of average ranks."""
    p, y = _as_arrays(preds, labels, "spearman")
    if len(p) < 2:
        raise ValueError("spearman needs n >= 2")
    rp = _average_ranks(p)
    ry = _average_ranks(y)
    dp = rp - rp.mean()
    dy = ry - ry.mean()
    denom = np.sqrt((dp * dp).sum() * (dy * dy).sum())
    if denom == 0.0:
        raise ZeroVarianceError("ranks have zero variance on at least one side")
    return float((dp * dy).sum() / denom)


_METRIC_FNS = {"roc_auc": roc_auc, "pr_auc": pr_auc, "mae": mae, "spearman": spearman}


def compute_metric(metric: str, preds, labels, seed: int = -1) -> MetricReport:
    if metric not in _METRIC_FNS:
        raise ValueError(f"unknown metric {metric!r}; choose from {METRIC_NAMES}")
    value = _METRIC_FNS[metric](preds, labels)
    return MetricReport(metric, value, n=len(np.asarray(preds)), seed=seed)


@dataclass(frozen=True)
class Aggregate:
    metric: str
    mean: float
    std: float
    n_seeds: int

    def render(self) -> str:
        return f"{self.mean:.3f}±{self.std:.3f}"


def aggregate(reports: Iterable[MetricReport]) -> Aggregate:
    """Mean and sample standard deviation (n-1) across per-seed reports."""
    reports = list(reports)
    if len(reports) < 2:
        raise ValueError("aggregation needs at least two reports")
    metrics = {r.metric for r in reports}
    if len(metrics) != 1:
        raise MixedMetricsError(f"cannot aggregate mixed metrics {sorted(metrics)}")
    values = np.array([r.value for r in reports])
    return Aggregate(reports[0].metric, float(values.mean()), float(values.std(ddof=1)), len(values))


def write_report_lines(path, dataset: str, reports: Iterable[MetricReport]) -> None:
    """Line-delimited export: dataset, metric, seed, value per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for report in reports:
            fh.write(report.line(dataset) + "\n")
