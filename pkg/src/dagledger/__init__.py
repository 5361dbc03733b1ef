"""Simulator for score-ranked block-DAG ledgers."""

from .engine import (
    AGGREGATE,
    ATOMIC,
    HONEST,
    ConfigError,
    HonestStrategy,
    InitDecision,
    LedgerState,
    LocalInfo,
    MinerSpec,
    MinerStrategy,
    PublishDecision,
    SimParams,
    StrategyContractError,
    TxRequest,
    action_phase,
    genesis,
    information_update_phase,
    mining_phase,
    nature_phase,
    non_atomic_resample,
    run,
    step,
)
from .metrics import (
    TrialMetrics,
    lag,
    mean_inclusion_delay,
    orphan_rate,
    pow_efficiency,
    reward_shares,
    surplus,
    trial_metrics,
)
from .experiments import (
    AggregateRecord,
    ExperimentConfig,
    canonical_point,
    efficiency_sweep_n,
    efficiency_sweep_q,
    emit,
    emit_trace,
    fairness_grid,
    load_config,
    records_to_csv,
    records_to_json,
    run_trials,
    single_run,
    trace_document,
)
from .dag import (
    Block,
    BlockDag,
    ConsistencyError,
    ScoreParams,
    Transaction,
    TxGraph,
    TxId,
    closure,
    depth,
    leaves,
    present_valid_transactions,
    reward_tx_id,
    score,
    top_k_leaves,
    valid_blocks,
    weight,
)

__all__ = [
    "AGGREGATE",
    "ATOMIC",
    "AggregateRecord",
    "Block",
    "BlockDag",
    "ConfigError",
    "ConsistencyError",
    "ExperimentConfig",
    "HONEST",
    "HonestStrategy",
    "InitDecision",
    "LedgerState",
    "LocalInfo",
    "MinerSpec",
    "MinerStrategy",
    "PublishDecision",
    "ScoreParams",
    "SimParams",
    "StrategyContractError",
    "Transaction",
    "TrialMetrics",
    "TxGraph",
    "TxId",
    "TxRequest",
    "action_phase",
    "canonical_point",
    "closure",
    "depth",
    "efficiency_sweep_n",
    "efficiency_sweep_q",
    "emit",
    "emit_trace",
    "fairness_grid",
    "genesis",
    "information_update_phase",
    "lag",
    "leaves",
    "load_config",
    "mean_inclusion_delay",
    "mining_phase",
    "nature_phase",
    "non_atomic_resample",
    "orphan_rate",
    "pow_efficiency",
    "present_valid_transactions",
    "records_to_csv",
    "records_to_json",
    "reward_shares",
    "reward_tx_id",
    "run",
    "run_trials",
    "score",
    "single_run",
    "step",
    "surplus",
    "top_k_leaves",
    "trace_document",
    "trial_metrics",
    "valid_blocks",
    "weight",
]

__version__ = "0.1.0"
