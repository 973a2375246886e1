"""Classification metrics and the two-sample Kolmogorov-Smirnov test.

Suspicious is the positive class. Any metric whose denominator is zero is
reported as 0 rather than NaN so reports stay plain JSON.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .errors import ParameterError

KS_SERIES_TERMS = 100


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @classmethod
    def from_labels(cls, y_true: Sequence[int], y_pred: Sequence[int]) -> "ConfusionMatrix":
        t = np.asarray(y_true).astype(bool)
        p = np.asarray(y_pred).astype(bool)
        if t.shape != p.shape:
            raise ParameterError(f"label vectors differ in shape: {t.shape} vs {p.shape}")
        return cls(
            tp=int(np.sum(t & p)),
            fp=int(np.sum(~t & p)),
            tn=int(np.sum(~t & ~p)),
            fn=int(np.sum(t & ~p)),
        )

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class MetricBundle:
    accuracy: float
    precision: float
    recall: float
    f1: float
    mcc: float

    def to_dict(self) -> dict:
        return asdict(self)


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


def mcc(cm: ConfusionMatrix) -> float:
    # integer products keep the result exactly antisymmetric under label inversion
    den = (cm.tp + cm.fp) * (cm.tp + cm.fn) * (cm.tn + cm.fp) * (cm.tn + cm.fn)
    if den == 0:
        return 0.0
    return (cm.tp * cm.tn - cm.fp * cm.fn) / math.sqrt(den)


def compute_metrics(cm: ConfusionMatrix) -> MetricBundle:
    if cm.total <= 0:
        raise ParameterError("confusion matrix is empty")
    precision = _ratio(cm.tp, cm.tp + cm.fp)
    recall = _ratio(cm.tp, cm.tp + cm.fn)
    return MetricBundle(
        accuracy=(cm.tp + cm.tn) / cm.total,
        precision=precision,
        recall=recall,
        f1=_ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn),
        mcc=mcc(cm),
    )


@dataclass(frozen=True)
class KSResult:
    statistic: float
    pvalue: float
    n_a: int
    n_b: int


def kolmogorov_sf(lam: float, terms: int = KS_SERIES_TERMS) -> float:
    """``P(K > lam)`` for the Kolmogorov distribution, series cut at ``terms`` terms."""
    if lam <= 0:
        return 1.0
    total = 0.0
    for k in range(1, terms + 1):
        total += (-1) ** (k - 1) * math.exp(-2.0 * k * k * lam * lam)
    return min(1.0, max(0.0, 2.0 * total))


def ks_two_sample(a: Sequence[float], b: Sequence[float]) -> KSResult:
    """Two-sample KS statistic with the asymptotic p-value.

    ``D`` is evaluated as ``|i*m - j*n| / (n*m)`` on integer counts, so it is
    the correctly rounded value of the exact rational gap. The p-value uses
    ``lam = D * sqrt(n*m / (n+m))``; it is poor for very small samples.
    """
    xa = np.sort(np.asarray(a, dtype=float))
    xb = np.sort(np.asarray(b, dtype=float))
    n, m = len(xa), len(xb)
    if n == 0 or m == 0:
        raise ParameterError("both samples must be non-empty")
    if np.isnan(xa).any() or np.isnan(xb).any():
        raise ParameterError("samples contain NaN")
    pts = np.concatenate([xa, xb])
    i = np.searchsorted(xa, pts, side="right").astype(object)
    j = np.searchsorted(xb, pts, side="right").astype(object)
    gap = max(abs(int(p) * m - int(q) * n) for p, q in zip(i, j))
    d = gap / (n * m)
    lam = d * math.sqrt(n * m / (n + m))
    return KSResult(statistic=d, pvalue=kolmogorov_sf(lam), n_a=n, n_b=m)
