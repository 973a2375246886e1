"""Run one detector on a design matrix and package the result."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .detectors import GaussianMixture, IsolationForest, dtree_fit, iforest_fit_score
from .errors import ParameterError
from .features import FeatureMatrix
from .metrics import ConfusionMatrix, MetricBundle, compute_metrics

ALGORITHMS = ("dtree", "gmm", "iforest")

DEFAULT_PARAMS = {
    "dtree": {"max_depth": 1},
    "gmm": {"n_components": 2, "n_init": 10, "max_iters": 200, "tol": 1e-6},
    "iforest": {"n_trees": 100, "subsample_size": 256, "contamination": 0.1},
}


@dataclass
class DetectionReport:
    detector: str
    params: dict
    feature_set: str
    granularity: str
    columns: tuple
    seed: int
    confusion: ConfusionMatrix
    metrics: MetricBundle
    ids: list
    y_true: list
    y_pred: list
    scores: Optional[list] = None
    dropped_ids: tuple = ()
    input_sha256: Optional[str] = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        preds = []
        for k, (i, t, p) in enumerate(zip(self.ids, self.y_true, self.y_pred)):
            row = {"id": int(i), "label": int(t), "predicted": int(p)}
            if self.scores is not None:
                row["score"] = float(self.scores[k])
            preds.append(row)
        return {
            "detector": self.detector,
            "params": self.params,
            "feature_set": self.feature_set,
            "granularity": self.granularity,
            "columns": list(self.columns),
            "seed": self.seed,
            "input_sha256": self.input_sha256,
            "n_rows": len(self.ids),
            "dropped_ids": list(self.dropped_ids),
            "confusion": self.confusion.to_dict(),
            "metrics": self.metrics.to_dict(),
            **self.extra,
            "predictions": preds,
        }


def run_detector(
    fm: FeatureMatrix,
    algo: str,
    params: Optional[dict] = None,
    seed: int = 42,
    feature_set: str = "",
    granularity: str = "agent",
) -> DetectionReport:
    if algo not in ALGORITHMS:
        raise ParameterError(f"unknown algorithm {algo!r}; choose from {', '.join(ALGORITHMS)}")
    merged = {**DEFAULT_PARAMS[algo], **(params or {})}
    scores = None
    extra: dict = {}
    if algo == "dtree":
        tree = dtree_fit(fm.X, fm.y, max_depth=merged["max_depth"], seed=seed)
        pred = tree.predict(fm.X)
        extra["thresholds"] = [
            {"feature": fm.columns[n.feature], "threshold": n.threshold} for n in tree.internal_nodes()
        ]
    elif algo == "gmm":
        model = GaussianMixture(seed=seed, **merged).fit(fm.X)
        pred = model.predict(fm.X)
        extra["gmm"] = {
            "weights": model.weights.tolist(),
            "means": model.means.tolist(),
            "suspicious_components": model.suspicious_components(),
            "converged": model.converged,
        }
    else:
        forest = IsolationForest(seed=seed, **merged)
        scores, pred, _ = iforest_fit_score(fm.X, forest)
        extra["n_flagged"] = int(pred.sum())
    pred = np.asarray(pred).astype(int)
    cm = ConfusionMatrix.from_labels(fm.y, pred)
    return DetectionReport(
        detector=algo,
        params=merged,
        feature_set=feature_set,
        granularity=granularity,
        columns=fm.columns,
        seed=seed,
        confusion=cm,
        metrics=compute_metrics(cm),
        ids=fm.ids.tolist(),
        y_true=fm.y.tolist(),
        y_pred=pred.tolist(),
        scores=None if scores is None else scores.tolist(),
        dropped_ids=fm.dropped_ids,
        extra=extra,
    )
