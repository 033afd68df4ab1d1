"""Command line, monitor REPL, reference oracles and the Burgers benchmark."""

from .bench import BenchError, BenchmarkConfig, BenchReport, bench_burgers, burgers_source
from .engine import EngineResult, engine_eval, finite_diff, rel_error, run_compiled
from .monitor import MonitorSession, monitor_command
from .oracle import Dual, OracleResult, oracle_eval

__all__ = [
    "BenchError", "BenchReport", "BenchmarkConfig", "Dual", "EngineResult", "MonitorSession",
    "OracleResult", "bench_burgers", "burgers_source", "engine_eval", "finite_diff",
    "monitor_command", "oracle_eval", "rel_error", "run_compiled",
]
