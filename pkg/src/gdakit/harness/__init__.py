"""Config-driven runner: JSON configs in, traces/summaries/reports out."""

from gdakit.harness.commands import cmd_check, cmd_compare, cmd_pselect, cmd_run
from gdakit.harness.config import (
    ConfigError,
    build_diag,
    build_init,
    build_optimizer,
    build_plan,
    build_problem,
    canonical_json,
    config_hash,
    load_config,
)
from gdakit.harness.io import (
    TRACE_COLUMNS,
    TraceFormatError,
    read_json,
    read_params,
    read_trace_csv,
    write_json,
    write_params,
    write_table_csv,
    write_trace_csv,
)

__all__ = [
    "ConfigError",
    "TRACE_COLUMNS",
    "TraceFormatError",
    "build_diag",
    "build_init",
    "build_optimizer",
    "build_plan",
    "build_problem",
    "canonical_json",
    "cmd_check",
    "cmd_compare",
    "cmd_pselect",
    "cmd_run",
    "config_hash",
    "load_config",
    "read_json",
    "read_params",
    "read_trace_csv",
    "write_json",
    "write_params",
    "write_table_csv",
    "write_trace_csv",
]
