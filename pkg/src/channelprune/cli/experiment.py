"""Sweep orchestration and CSV report emission.

A sweep runs every (seed, lambda, selector) cell of the config, one row
per cell. Rows are emitted sorted by (seed, lambda, selector), so the
report is independent of execution order. Wall-clock timings are always
measured but only written when the config enables them; with timing off,
identical configs produce byte-identical files.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..core import ChannelMatrix, reconstruction_error_sq
from ..errors import CapacityError
from ..prune import Selector, protect_channels, select_channels
from .config import ExperimentConfig, format_value, parse_config_lines
from .matrix_io import load_matrix

__all__ = [
    "CSV_HEADER",
    "ExperimentReport",
    "ReportRow",
    "replay_report",
    "run_experiment",
    "write_report",
]

CSV_HEADER = (
    "instance,seed,selector,lambda,protection,n_prune,n_protected,"
    "error_sq,relative_error,error_future,approx_ratio,wall_time_ms"
)

ORACLE_SKIPPED = "oracle_skipped"


@dataclass(frozen=True)
class ReportRow:
    instance: str
    seed: int
    selector: Selector
    lam: float
    protection: bool
    n_prune: int
    n_protected: int
    error_sq: float
    relative_error: float
    error_future: float | None
    approx_ratio: float | str | None  # None: oracle off; ORACLE_SKIPPED: cap exceeded
    wall_time_ms: float


@dataclass(frozen=True)
class ExperimentReport:
    config: ExperimentConfig
    rows: tuple[ReportRow, ...]


def _norm_fro(q: ChannelMatrix, k: ChannelMatrix) -> float:
    return float(np.sqrt(np.sum((q.data @ k.data.T) ** 2)))


def _approx_ratio(error_sq: float, optimum: float) -> float:
    if optimum > 0.0:
        return error_sq / optimum
    return 1.0 if error_sq <= 0.0 else math.inf


def _load_instance(cfg: ExperimentConfig):
    q = load_matrix(cfg.q_path)
    k = load_matrix(cfg.k_path)
    q_future = load_matrix(cfg.q_future_path) if cfg.q_future_path else None
    if q.cols != k.cols or (q_future is not None and q_future.cols != k.cols):
        raise ValueError("loaded matrices disagree on channel count")
    name = Path(cfg.q_path).stem
    return f"file-{name}", q, k, q_future


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Run the full sweep described by the config."""
    cfg.validate()
    from ..sim import generate_instance  # local import keeps module load light

    policy = cfg.policy()
    rows: list[ReportRow] = []
    if cfg.mode == "from-files":
        file_instance = _load_instance(cfg)

    for seed in cfg.seeds:
        if cfg.mode == "synthetic":
            q, k, q_future = generate_instance(cfg.synthetic_spec(seed))
            instance = f"syn-{seed}"
        else:
            instance, q, k, q_future = file_instance

        protected = protect_channels(k, policy)
        denom_obs = _norm_fro(q, k)
        denom_future = _norm_fro(q_future, k) if q_future is not None else None

        for lam in cfg.lambdas:
            oracle_cache: dict[int, float | str] = {}
            for selector in cfg.selectors:
                start = time.perf_counter()
                selection = select_channels(
                    selector, q, k, lam, protected, seed=seed, cap=cfg.enumeration_cap
                )
                wall_ms = (time.perf_counter() - start) * 1e3

                relative = math.sqrt(selection.error_sq) / denom_obs if denom_obs > 0.0 else math.inf
                error_future = None
                if q_future is not None and denom_future is not None and denom_future > 0.0:
                    future_sq = reconstruction_error_sq(q_future, k, selection.pruned)
                    error_future = math.sqrt(future_sq) / denom_future

                approx: float | str | None = None
                if cfg.oracle:
                    key = selection.n_prune
                    if key not in oracle_cache:
                        try:
                            oracle_cache[key] = select_channels(
                                Selector.ORACLE, q, k, lam, protected, cap=cfg.enumeration_cap
                            ).error_sq
                        except CapacityError:
                            oracle_cache[key] = ORACLE_SKIPPED
                    optimum = oracle_cache[key]
                    approx = optimum if isinstance(optimum, str) else _approx_ratio(selection.error_sq, optimum)

                rows.append(
                    ReportRow(
                        instance=instance,
                        seed=seed,
                        selector=selector,
                        lam=lam,
                        protection=policy.enabled,
                        n_prune=selection.n_prune,
                        n_protected=len(protected),
                        error_sq=selection.error_sq,
                        relative_error=relative,
                        error_future=error_future,
                        approx_ratio=approx,
                        wall_time_ms=wall_ms,
                    )
                )

    rows.sort(key=lambda r: (r.seed, r.lam, r.selector.value))
    return ExperimentReport(config=cfg, rows=tuple(rows))


def _format_row(row: ReportRow, timing: bool) -> str:
    if row.approx_ratio is None:
        approx = ""
    elif isinstance(row.approx_ratio, str):
        approx = row.approx_ratio
    else:
        approx = format_value(row.approx_ratio)
    fields = [
        row.instance,
        str(row.seed),
        row.selector.value,
        format_value(row.lam),
        "true" if row.protection else "false",
        str(row.n_prune),
        str(row.n_protected),
        format_value(row.error_sq),
        format_value(row.relative_error),
        "" if row.error_future is None else format_value(row.error_future),
        approx,
        format_value(row.wall_time_ms) if timing else "",
    ]
    return ",".join(fields)


def render_report(report: ExperimentReport) -> str:
    """Render the report as CSV text with the resolved config on top."""
    lines = [f"# {key}={value}" for key, value in report.config.resolved_items()]
    lines.append(CSV_HEADER)
    lines.extend(_format_row(row, report.config.timing) for row in report.rows)
    return "\n".join(lines) + "\n"


def write_report(report: ExperimentReport, path: str | Path) -> None:
    Path(path).write_text(render_report(report), encoding="utf-8")


def replay_report(path: str | Path, tolerance: float = 1e-9) -> list[str]:
    """Re-run a report's embedded config and diff the error columns.

    Returns a list of mismatch descriptions; an empty list means every
    row was reproduced within `tolerance` relative error.
    """
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    config_lines = [line[2:] for line in lines if line.startswith("# ")]
    cfg = parse_config_lines(config_lines)
    fresh = run_experiment(cfg)

    data_lines = [line for line in lines if line and not line.startswith("#")]
    if not data_lines or data_lines[0] != CSV_HEADER:
        return [f"{path}: missing or unexpected header"]
    problems = []
    if len(data_lines) - 1 != len(fresh.rows):
        problems.append(f"row count {len(data_lines) - 1} != replay count {len(fresh.rows)}")
        return problems
    for lineno, (line, row) in enumerate(zip(data_lines[1:], fresh.rows), start=2):
        recorded = float(line.split(",")[7])
        if abs(recorded - row.error_sq) > tolerance * max(1.0, abs(row.error_sq)):
            problems.append(
                f"line {lineno}: error_sq {recorded} not reproduced (replay {row.error_sq})"
            )
    return problems
