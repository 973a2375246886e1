"""Per-agent tabular and graph features for the detectors.

Column order is fixed: ``txn_mean_time, num_txns, in_degree, out_degree``.
``txn_mean_time`` is the arithmetic mean of the agent's sending steps, so a
10PM agent that also transacts at 2AM gets a mean pulled toward midday. Pass
``circular=True`` to use the circular mean instead.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .abm import Label, SimRun
from .errors import DataError
from .schedule import STEPS_PER_DAY

COLUMNS = ("txn_mean_time", "num_txns", "in_degree", "out_degree")


@dataclass(frozen=True)
class AgentFeatures:
    agent_id: int
    label: Label
    txn_mean_time: Optional[float]
    num_txns: int
    in_degree: int
    out_degree: int

    def value(self, column: str):
        return getattr(self, column)


class FeatureSet(str, Enum):
    TIME_ONLY = "time_only"
    ALL = "all"
    IN_DEGREE_ONLY = "in_degree_only"
    OUT_DEGREE_ONLY = "out_degree_only"

    @property
    def columns(self) -> tuple[str, ...]:
        return {
            FeatureSet.TIME_ONLY: ("txn_mean_time", "num_txns"),
            FeatureSet.ALL: COLUMNS,
            FeatureSet.IN_DEGREE_ONLY: ("in_degree",),
            FeatureSet.OUT_DEGREE_ONLY: ("out_degree",),
        }[self]

    @classmethod
    def parse(cls, name: str) -> "FeatureSet":
        aliases = {"time": cls.TIME_ONLY, "in_degree": cls.IN_DEGREE_ONLY, "out_degree": cls.OUT_DEGREE_ONLY}
        if name in aliases:
            return aliases[name]
        return cls(name)


def _circular_mean(steps: Sequence[int]) -> float:
    angles = [2 * math.pi * s / STEPS_PER_DAY for s in steps]
    ang = math.atan2(sum(map(math.sin, angles)), sum(map(math.cos, angles)))
    return (ang * STEPS_PER_DAY / (2 * math.pi)) % STEPS_PER_DAY


def extract_features(run: SimRun, circular: bool = False) -> list[AgentFeatures]:
    """One row per agent, zero-event agents included."""
    sent: dict[int, list[int]] = defaultdict(list)
    received: dict[int, int] = defaultdict(int)
    for e in run.events:
        sent[e.sender_id].append(e.step)
        if e.receiver_id is not None:
            received[e.receiver_id] += 1

    rows = []
    for agent_id, label in run.agents:
        steps = sent.get(agent_id, [])
        if not steps:
            mean_time = None
        elif circular:
            mean_time = _circular_mean(steps)
        else:
            mean_time = math.fsum(steps) / len(steps)
        rows.append(
            AgentFeatures(
                agent_id=agent_id,
                label=label,
                txn_mean_time=mean_time,
                num_txns=len(steps),
                in_degree=received.get(agent_id, 0),
                out_degree=len(steps),
            )
        )
    return rows


@dataclass(frozen=True)
class FeatureMatrix:
    X: np.ndarray
    y: np.ndarray  # 1 = suspicious
    ids: np.ndarray
    columns: tuple[str, ...]
    dropped_ids: tuple[int, ...] = ()


def select_columns(features: Sequence[AgentFeatures], feature_set: FeatureSet | str) -> FeatureMatrix:
    """Assemble the design matrix for one feature set.

    Rows with no transactions have no mean time; they are dropped (and listed
    in ``dropped_ids``) whenever the set contains ``txn_mean_time``.
    """
    feature_set = FeatureSet.parse(feature_set) if isinstance(feature_set, str) else feature_set
    cols = feature_set.columns
    needs_time = "txn_mean_time" in cols
    kept, dropped = [], []
    for row in features:
        if needs_time and row.txn_mean_time is None:
            dropped.append(row.agent_id)
        else:
            kept.append(row)
    if not kept:
        raise DataError(f"no rows left for feature set {feature_set.value!r}")
    X = np.array([[float(r.value(c)) for c in cols] for r in kept], dtype=float)
    y = np.array([int(Label(r.label) is Label.SUSPICIOUS) for r in kept], dtype=int)
    ids = np.array([r.agent_id for r in kept], dtype=int)
    return FeatureMatrix(X=X, y=y, ids=ids, columns=cols, dropped_ids=tuple(dropped))


def event_matrix(run: SimRun) -> FeatureMatrix:
    """Per-event design matrix (single column: step), as used for the simple model."""
    if not run.events:
        raise DataError("run has no events")
    X = np.array([[float(e.step)] for e in run.events])
    y = np.array([int(e.sender_label is Label.SUSPICIOUS) for e in run.events], dtype=int)
    return FeatureMatrix(X=X, y=y, ids=np.arange(len(run.events)), columns=("step",))


def class_means(features: Sequence[AgentFeatures]) -> dict[str, dict[str, Optional[float]]]:
    out = {}
    for label in Label:
        rows = [r for r in features if Label(r.label) is label]
        means = {}
        for c in COLUMNS:
            vals = [r.value(c) for r in rows if r.value(c) is not None]
            means[c] = (math.fsum(vals) / len(vals)) if vals else None
        out[label.value] = means
    return out
