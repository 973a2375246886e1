"""Agent-based transaction models.

Two models share the same timing rule. Each agent owns a random stream
seeded from the master seed and its id; at every step it makes one
Bernoulli draw against its type's probability table.

* ``run_simple`` emits one-sided (cash) events: no receiver, no amount.
* ``run_graph`` additionally picks a receiver and reads the amount from the
  sender's 96-entry amount table, drawn once when the model is built.

Agent ids are contiguous: normal agents take ``0 .. n_normal-1`` and
suspicious agents follow. Events come out ordered by ``(step, sender_id)``.

Per-agent draw order (this fixes the output for a given seed):

1. graph model only: 96 amount draws, resampling draws below 0.01;
2. 96 uniforms deciding whether the agent transacts at each step;
3. graph model only, per event in step order: one uniform for the receiver
   type, then one integer for the receiver within the chosen pool.
"""
from __future__ import annotations

import dataclasses
import json
import math
import os
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .errors import ConfigError
from .rng import MASK64, derive_seed, make_rng
from .schedule import (
    DEFAULT_MEAN_NUM_TXNS,
    MINUTES_PER_STEP,
    STEPS_PER_DAY,
    ProbTable,
    build_prob_table,
)

DEFAULT_SEED = 42
MIN_AMOUNT = 0.01
MAX_AMOUNT_ATTEMPTS = 100


class Label(str, Enum):
    NORMAL = "normal"
    SUSPICIOUS = "suspicious"

    @property
    def other(self) -> "Label":
        return Label.SUSPICIOUS if self is Label.NORMAL else Label.NORMAL


class ModelKind(str, Enum):
    SIMPLE = "simple"
    GRAPH = "graph"


class PartnerSelection(str, Enum):
    BY_TYPE = "by_type"  # pick receiver type by pair probability, then uniform within type
    UNIFORM = "uniform"  # uniform over every agent


@dataclass(frozen=True)
class AgentTypeParams:
    label: Label
    mean_hour: float
    mean_num_txns: float = DEFAULT_MEAN_NUM_TXNS
    amount_mean: float = 20.0
    amount_std: float = 5.0
    pair_prob_same_type: float = 0.9

    def __post_init__(self):
        object.__setattr__(self, "label", Label(self.label))
        if not 0.0 <= self.pair_prob_same_type <= 1.0:
            raise ConfigError(f"pair_prob_same_type must be in [0, 1], got {self.pair_prob_same_type}")
        if not self.amount_std >= 0:
            raise ConfigError(f"amount_std must be >= 0, got {self.amount_std}")
        if not math.isfinite(self.amount_mean):
            raise ConfigError(f"amount_mean must be finite, got {self.amount_mean}")
        if not 0 <= self.mean_hour < 24:
            raise ConfigError(f"mean_hour must be in [0, 24), got {self.mean_hour}")
        if not (math.isfinite(self.mean_num_txns) and self.mean_num_txns >= 0):
            raise ConfigError(f"mean_num_txns must be finite and >= 0, got {self.mean_num_txns}")

    def prob_table(self) -> ProbTable:
        return build_prob_table(self.mean_hour, self.mean_num_txns)


NORMAL_DEFAULTS = AgentTypeParams(Label.NORMAL, mean_hour=12.0, mean_num_txns=4.0, pair_prob_same_type=0.9)
SUSPICIOUS_DEFAULTS = AgentTypeParams(Label.SUSPICIOUS, mean_hour=22.0, mean_num_txns=10.0, pair_prob_same_type=0.7)


@dataclass(frozen=True)
class ModelConfig:
    model_kind: ModelKind = ModelKind.GRAPH
    n_normal: int = 1000
    n_suspicious: int = 10
    normal_params: AgentTypeParams = NORMAL_DEFAULTS
    suspicious_params: AgentTypeParams = SUSPICIOUS_DEFAULTS
    seed: Optional[int] = None
    steps: int = STEPS_PER_DAY
    minutes_per_step: int = MINUTES_PER_STEP
    partner_selection: PartnerSelection = PartnerSelection.BY_TYPE

    def __post_init__(self):
        object.__setattr__(self, "model_kind", ModelKind(self.model_kind))
        object.__setattr__(self, "partner_selection", PartnerSelection(self.partner_selection))
        if self.steps != STEPS_PER_DAY or self.minutes_per_step != MINUTES_PER_STEP:
            raise ConfigError(
                f"steps and minutes_per_step are fixed at {STEPS_PER_DAY} and {MINUTES_PER_STEP}"
            )
        for name in ("n_normal", "n_suspicious"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise ConfigError(f"{name} must be a non-negative integer, got {v!r}")
        if self.n_normal + self.n_suspicious < 1:
            raise ConfigError("population is empty: n_normal + n_suspicious must be >= 1")
        if self.normal_params.label is not Label.NORMAL:
            raise ConfigError("normal_params.label must be 'normal'")
        if self.suspicious_params.label is not Label.SUSPICIOUS:
            raise ConfigError("suspicious_params.label must be 'suspicious'")
        if self.seed is not None and (isinstance(self.seed, bool) or not isinstance(self.seed, int)):
            raise ConfigError(f"seed must be an integer, got {self.seed!r}")
        if self.model_kind is ModelKind.GRAPH and self.partner_selection is PartnerSelection.BY_TYPE:
            self._check_routing()

    def _check_routing(self):
        counts = {Label.NORMAL: self.n_normal, Label.SUSPICIOUS: self.n_suspicious}
        for params in (self.normal_params, self.suspicious_params):
            if counts[params.label] == 0:
                continue
            own, other = params.label, params.label.other
            if params.pair_prob_same_type > 0 and counts[own] == 0:
                raise ConfigError(f"{own.value} agents route to empty {own.value} population")
            if params.pair_prob_same_type < 1 and counts[other] == 0:
                raise ConfigError(
                    f"{own.value} agents route {1 - params.pair_prob_same_type:.2f} of "
                    f"transactions to the empty {other.value} population"
                )

    def params_for(self, label: Label) -> AgentTypeParams:
        return self.normal_params if label is Label.NORMAL else self.suspicious_params

    def labels(self) -> list[Label]:
        return [Label.NORMAL] * self.n_normal + [Label.SUSPICIOUS] * self.n_suspicious

    def resolved_seed(self) -> int:
        return DEFAULT_SEED if self.seed is None else self.seed

    def with_overrides(self, **changes) -> "ModelConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["model_kind"] = self.model_kind.value
        d["partner_selection"] = self.partner_selection.value
        for key in ("normal_params", "suspicious_params"):
            d[key]["label"] = d[key]["label"].value
        return d

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "ModelConfig":
        """Build a config from a mapping using the exact field names; unknown keys raise."""
        if not isinstance(raw, dict):
            raise ConfigError("config must be a mapping")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        kwargs = dict(raw)
        defaults = {"normal_params": NORMAL_DEFAULTS, "suspicious_params": SUSPICIOUS_DEFAULTS}
        for key, base in defaults.items():
            if key in kwargs:
                kwargs[key] = _params_from_dict(kwargs[key], base, key)
        try:
            return cls(**kwargs)
        except (ValueError, TypeError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc


def _params_from_dict(raw: Any, base: AgentTypeParams, where: str) -> AgentTypeParams:
    if not isinstance(raw, dict):
        raise ConfigError(f"{where} must be a mapping")
    known = {f.name for f in dataclasses.fields(AgentTypeParams)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {', '.join(unknown)}")
    try:
        return dataclasses.replace(base, **raw)
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{where}: {exc}") from exc


def load_config(path: str | os.PathLike) -> ModelConfig:
    """Read a JSON (``.json``) or TOML (anything else) config file."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        if path.suffix.lower() == ".json":
            raw = json.loads(data)
        else:
            try:
                import tomllib
            except ModuleNotFoundError:
                import tomli as tomllib
            raw = tomllib.loads(data.decode("utf-8"))
    except ValueError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    return ModelConfig.from_dict(raw)


@dataclass(frozen=True)
class TransactionEvent:
    step: int
    sender_id: int
    receiver_id: Optional[int]
    amount: Optional[float]
    sender_label: Label


@dataclass(frozen=True)
class SimRun:
    config: ModelConfig
    agents: tuple[tuple[int, Label], ...]
    events: tuple[TransactionEvent, ...] = field(default_factory=tuple)

    @property
    def is_graph(self) -> bool:
        return self.config.model_kind is ModelKind.GRAPH

    def label_of(self, agent_id: int) -> Label:
        return self.agents[agent_id][1]


def derive_agent_seed(master_seed: int, agent_id: int) -> int:
    """64-bit seed for one agent's stream (SplitMix64 of ``master XOR agent_id``)."""
    return derive_seed(master_seed, agent_id)


def _amount_table(rng: np.random.Generator, params: AgentTypeParams) -> list[float]:
    table = rng.normal(params.amount_mean, params.amount_std, size=STEPS_PER_DAY)
    for t in range(STEPS_PER_DAY):
        attempts = 1
        while table[t] < MIN_AMOUNT and attempts < MAX_AMOUNT_ATTEMPTS:
            table[t] = rng.normal(params.amount_mean, params.amount_std)
            attempts += 1
        if table[t] < MIN_AMOUNT:
            table[t] = MIN_AMOUNT
    # whole cents; round() is correctly rounded so "%.2f" round-trips exactly
    return [round(float(v), 2) for v in table]


def _simulate(config: ModelConfig, graph: bool) -> SimRun:
    seed = config.resolved_seed() & MASK64
    labels = config.labels()
    n_total = len(labels)
    tables = {lab: config.params_for(lab).prob_table().txn_prob for lab in Label}
    pools = {
        Label.NORMAL: np.arange(0, config.n_normal),
        Label.SUSPICIOUS: np.arange(config.n_normal, n_total),
    }
    by_type = config.partner_selection is PartnerSelection.BY_TYPE

    per_agent: list[list[TransactionEvent]] = []
    for agent_id, label in enumerate(labels):
        params = config.params_for(label)
        rng = make_rng(derive_agent_seed(seed, agent_id))
        amounts = _amount_table(rng, params) if graph else None
        fires = np.flatnonzero(rng.random(STEPS_PER_DAY) < tables[label])
        events = []
        for t in fires:
            t = int(t)
            if not graph:
                events.append(TransactionEvent(t, agent_id, None, None, label))
                continue
            if by_type:
                u = rng.random()
                pool = pools[label] if u < params.pair_prob_same_type else pools[label.other]
                receiver = int(pool[rng.integers(len(pool))])
            else:
                receiver = int(rng.integers(n_total))
            events.append(TransactionEvent(t, agent_id, receiver, amounts[t], label))
        per_agent.append(events)

    ordered = sorted((e for evs in per_agent for e in evs), key=lambda e: (e.step, e.sender_id))
    agents = tuple((i, lab) for i, lab in enumerate(labels))
    snapshot = config.with_overrides(seed=config.resolved_seed())
    return SimRun(config=snapshot, agents=agents, events=tuple(ordered))


def run_simple(config: ModelConfig) -> SimRun:
    """Run the one-sided cash model for one 96-step day."""
    if config.model_kind is not ModelKind.SIMPLE:
        raise ConfigError("run_simple requires model_kind='simple'")
    return _simulate(config, graph=False)


def run_graph(config: ModelConfig) -> SimRun:
    """Run the sender/receiver model for one 96-step day."""
    if config.model_kind is not ModelKind.GRAPH:
        raise ConfigError("run_graph requires model_kind='graph'")
    return _simulate(config, graph=True)


def run(config: ModelConfig) -> SimRun:
    return run_graph(config) if config.model_kind is ModelKind.GRAPH else run_simple(config)


def paper_config(kind: ModelKind | str = ModelKind.GRAPH, seed: int = DEFAULT_SEED) -> ModelConfig:
    """The reported setup: 1000 normal agents at noon/4 per day, 10 suspicious at 10PM/10 per day."""
    return ModelConfig(model_kind=ModelKind(kind), seed=seed)
