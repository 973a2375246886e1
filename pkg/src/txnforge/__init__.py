"""Agent-based synthetic transaction generator with an outlier-detection benchmark."""
from .abm import (
    AgentTypeParams,
    Label,
    ModelConfig,
    ModelKind,
    SimRun,
    TransactionEvent,
    derive_agent_seed,
    load_config,
    paper_config,
    run,
    run_graph,
    run_simple,
)
from .features import AgentFeatures, FeatureSet, extract_features, select_columns
from .schedule import ProbTable, build_prob_table, gaussian_bin_mass

__version__ = "0.1.0"
