"""Batch experiment driver: configuration, training, evaluation, comparison."""

from .compare import (
    ComparisonCell,
    ComparisonTable,
    RunSummary,
    compare_table,
    load_run_summary,
    summarize,
    write_comparison_csv,
)
from .config import (
    ConfigError,
    RunConfig,
    build_run_config,
    config_as_dict,
    load_config_file,
    write_config_snapshot,
)
from .running import (
    AGENT_SEED_OFFSET,
    BUFFER_SEED_OFFSET,
    ConstantScoreAgent,
    RunArtifacts,
    ScriptedOnsetAgent,
    SeedResult,
    agent_policy,
    collect_records,
    eval_fingerprint,
    export_traces,
    gen_dataset,
    rollout_records,
    run_eval,
    run_training,
)

__all__ = [
    "AGENT_SEED_OFFSET",
    "BUFFER_SEED_OFFSET",
    "ComparisonCell",
    "ComparisonTable",
    "ConfigError",
    "ConstantScoreAgent",
    "RunArtifacts",
    "RunConfig",
    "RunSummary",
    "ScriptedOnsetAgent",
    "SeedResult",
    "agent_policy",
    "build_run_config",
    "collect_records",
    "compare_table",
    "config_as_dict",
    "eval_fingerprint",
    "export_traces",
    "gen_dataset",
    "load_config_file",
    "load_run_summary",
    "rollout_records",
    "run_eval",
    "run_training",
    "summarize",
    "write_comparison_csv",
    "write_config_snapshot",
]
