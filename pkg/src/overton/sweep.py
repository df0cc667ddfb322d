"""(K, t_delta) parameter sweeps with replicated, independently seeded runs.

Every replicate of every cell gets its own SplitMix64 stream derived from
``(base_seed, K, t_delta, replicate)``, and aggregates use exactly rounded
sums, so a sweep's output depends only on its configuration and never on how
many workers ran it.
"""

from __future__ import annotations

import logging
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import metrics
from .core import ManipulatorGroup, ModelKind, ModelSpec, OpinionState
from .models import StopRule, default_horizon, run_simulation
from .rng import SplitMix64, derive_seed

log = logging.getLogger(__name__)

WORKERS_ENV = "OVERTON_WORKERS"
AGGREGATE_FIELDS = (
    "mean_of_means",
    "mean_of_stds",
    "mean_n_clusters",
    "mean_center",
    "mean_amplitude",
    "mean_n_primary",
)
_SUMMARY_KEYS = ("mean", "std", "n_clusters", "center", "amplitude", "n_primary")


class SweepError(RuntimeError):
    def __init__(self, k: int, t_delta: int, replicate: Optional[int], cause: BaseException):
        self.k, self.t_delta, self.replicate = k, t_delta, replicate
        where = f"K={k}, t_delta={t_delta}"
        if replicate is not None:
            where += f", replicate={replicate}"
        super().__init__(f"sweep cell ({where}) failed: {cause!r}")


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """Everything a cell needs apart from its (K, t_delta) coordinates."""

    kind: ModelKind
    epsilon: float
    init: np.ndarray
    f_start: float = -1.0
    f_end: float = 1.0
    stop: Optional[StopRule] = None
    horizon: Optional[int] = None
    snapshots: Optional[tuple[str, ...]] = None  # subset of {"t_delta", "final"}
    delta: float = 0.5
    h: int = metrics.DEFAULT_H
    alpha: float = metrics.DEFAULT_ALPHA
    gap_tolerance: float = metrics.DEFAULT_GAP_TOLERANCE
    base_seed: int = 0
    weights: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        init = np.array(self.init, dtype=np.float64)
        init.setflags(write=False)
        object.__setattr__(self, "init", init)
        if self.snapshots is None:
            snaps = ("t_delta", "final") if self.kind.weighted else ("final",)
            object.__setattr__(self, "snapshots", snaps)
        bad = set(self.snapshots) - {"t_delta", "final"}
        if bad or not self.snapshots:
            raise ValueError(f"snapshots must be a non-empty subset of t_delta/final, got {self.snapshots}")

    @property
    def resolved_horizon(self) -> int:
        return default_horizon(self.kind) if self.horizon is None else self.horizon


@dataclass(frozen=True)
class SweepGrid:
    k_values: tuple[int, ...]
    tdelta_values: tuple[int, ...]
    replicates: int = 1

    def __post_init__(self):
        object.__setattr__(self, "k_values", tuple(int(k) for k in self.k_values))
        object.__setattr__(self, "tdelta_values", tuple(int(t) for t in self.tdelta_values))
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if any(k < 0 for k in self.k_values) or any(t < 0 for t in self.tdelta_values):
            raise ValueError("K and t_delta values must be non-negative")
        if len(set(self.k_values)) != len(self.k_values) or \
                len(set(self.tdelta_values)) != len(self.tdelta_values):
            raise ValueError("K and t_delta values must not repeat")

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.k_values), len(self.tdelta_values)


@dataclass
class CellResult:
    k: int
    t_delta: int
    replicates: int
    runs: list[dict]  # per replicate: {label: summary dict} plus stop info
    aggregates: dict[str, dict[str, float]]
    effective_weights: dict[str, list[float]]


def replicate_stream(config: ExperimentConfig, k: int, t_delta: int, replicate: int) -> SplitMix64:
    return SplitMix64(derive_seed(config.base_seed, k, t_delta, replicate))


def run_replicate(config: ExperimentConfig, k: int, t_delta: int, replicate: int) -> dict:
    group = ManipulatorGroup(k=k, f_start=config.f_start, f_end=config.f_end, t_delta=t_delta)
    horizon = config.resolved_horizon
    if "t_delta" in config.snapshots and t_delta > horizon:
        raise ValueError(f"t_delta={t_delta} exceeds horizon {horizon}")
    rng = replicate_stream(config, k, t_delta, replicate) if config.kind.stochastic else None
    traj = run_simulation(
        ModelSpec(config.kind, config.epsilon, config.weights),
        OpinionState(config.init, 0),
        group,
        stop=config.stop,
        horizon=horizon,
        snapshot_times=[t_delta] if "t_delta" in config.snapshots else [],
        rng=rng,
    )
    out = {"stop_time": traj.stop_time, "stop_reason": traj.stop_reason.value}
    for label in config.snapshots:
        state = traj.at(t_delta) if label == "t_delta" else traj.final
        out[label] = metrics.summarize(state.opinions, config.epsilon, config.delta, config.h,
                                       config.alpha, config.gap_tolerance)
        out[label]["opinions"] = state.opinions.tolist()
    return out


def _aggregate(runs: Sequence[dict], label: str) -> dict[str, float]:
    n = len(runs)
    return {
        name: math.fsum(r[label][key] for r in runs) / n
        for name, key in zip(AGGREGATE_FIELDS, _SUMMARY_KEYS)
    }


def run_cell(k: int, t_delta: int, config: ExperimentConfig, replicates: int = 1) -> CellResult:
    runs = []
    for rep in range(replicates):
        try:
            runs.append(run_replicate(config, k, t_delta, rep))
        except Exception as exc:  # report the coordinates, keep the cause
            raise SweepError(k, t_delta, rep, exc) from exc
    if not config.kind.stochastic and replicates > 1:
        first = runs[0]
        if any(r[lab]["opinions"] != first[lab]["opinions"] for r in runs[1:] for lab in config.snapshots):
            raise AssertionError(f"deterministic HK replicates differ at K={k}, t_delta={t_delta}")
        warnings.warn("replicates > 1 for deterministic HK: runs are identical", stacklevel=2)
    return CellResult(
        k=k,
        t_delta=t_delta,
        replicates=replicates,
        runs=runs,
        aggregates={lab: _aggregate(runs, lab) for lab in config.snapshots},
        effective_weights={lab: [w for r in runs for w in r[lab]["effective_weights"]]
                           for lab in config.snapshots},
    )


def _cell_job(args):
    k, t_delta, config, replicates = args
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return run_cell(k, t_delta, config, replicates)


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    return os.cpu_count() or 1


def run_sweep(grid: SweepGrid, config: ExperimentConfig, parallelism: Optional[int] = None,
              keep_runs: bool = False) -> list[list[CellResult]]:
    """All cells of ``grid``, as a matrix indexed ``[k_index][t_delta_index]``.

    Per-replicate opinion vectors are dropped unless ``keep_runs``, to keep
    large sweeps small in memory.
    """
    workers = default_workers() if parallelism is None else max(1, parallelism)
    jobs = [(k, td, config, grid.replicates) for k in grid.k_values for td in grid.tdelta_values]
    log.info("sweep: %d cells x %d replicates on %d worker(s)", len(jobs), grid.replicates, workers)
    if workers == 1 or len(jobs) <= 1:
        results = [_cell_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_cell_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    matrix: list[list[CellResult]] = [[None] * len(grid.tdelta_values) for _ in grid.k_values]  # type: ignore[list-item]
    ki = {k: i for i, k in enumerate(grid.k_values)}
    ti = {t: j for j, t in enumerate(grid.tdelta_values)}
    for cell in results:
        if not keep_runs:
            for r in cell.runs:
                for lab in config.snapshots:
                    r[lab].pop("opinions", None)
        matrix[ki[cell.k]][ti[cell.t_delta]] = cell
    return matrix
