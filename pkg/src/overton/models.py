"""Simultaneous update rules and the run driver.

Five rules are supported: Hegselmann-Krause (HK), Deffuant-Weisbuch (DW) and
the attractive / repulsive / attractive-repulsive weighted HK variants. All
agents update from the frozen time-t state; the manipulator group is never
updated and follows its schedule.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from . import kernels
from .core import ManipulatorGroup, ModelKind, ModelSpec, OpinionState
from .rng import SplitMix64

HK_TOL = 5e-4
DW_DECIMALS = 3
HARD_HORIZON = 5000
CLAMP_SLACK = 1e-12

_WEIGHTED_MODE = {
    ModelKind.AWHK: kernels.ATTRACTIVE,
    ModelKind.RWHK: kernels.REPULSIVE,
    ModelKind.ARWHK: kernels.ATTRACTIVE_REPULSIVE,
}


class StopKind(str, enum.Enum):
    MAX_CHANGE = "max_change"
    ROUNDED_CLUSTERS = "rounded_clusters"
    FIXED_HORIZON = "fixed_horizon"


@dataclass(frozen=True)
class StopRule:
    kind: StopKind
    tol: float = HK_TOL
    decimals: int = DW_DECIMALS

    @classmethod
    def for_model(cls, kind: ModelKind) -> "StopRule":
        if kind is ModelKind.HK:
            return cls(StopKind.MAX_CHANGE)
        if kind is ModelKind.DW:
            return cls(StopKind.ROUNDED_CLUSTERS)
        return cls(StopKind.FIXED_HORIZON)


def default_horizon(kind: ModelKind) -> int:
    if kind is ModelKind.RWHK:
        return 1000
    if kind.weighted:
        return 500
    return HARD_HORIZON


class StopReason(str, enum.Enum):
    CONVERGED = "converged"
    HORIZON = "horizon"
    OSCILLATING = "oscillating"


@dataclass
class Trajectory:
    snapshots: list[OpinionState]
    manipulator_opinions: list[float]
    stop_time: int
    stop_reason: StopReason
    weights: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def final(self) -> OpinionState:
        return self.snapshots[-1]

    def at(self, t: int) -> OpinionState:
        for s in self.snapshots:
            if s.time == t:
                return s
        raise KeyError(f"no snapshot at t={t}")


def _sched_args(group: ManipulatorGroup):
    return group.k, float(group.f_start), group.slope, float(group.f_end), group.t_delta


def _checked(x: np.ndarray, overshoot: float = 0.0) -> np.ndarray:
    if overshoot > CLAMP_SLACK:
        raise AssertionError(f"opinion left [-1, 1] by {overshoot:.3e} before clamping")
    return x


def hk_step(state: OpinionState, group: ManipulatorGroup, epsilon: float) -> OpinionState:
    """Each agent moves to the mean of all extended opinions within epsilon."""
    x, t, _, _ = kernels.hk_run(state.opinions, *_sched_args(group), epsilon,
                                state.time, state.time + 1, -1.0, 0)
    return OpinionState(x, t)


def dw_step(state: OpinionState, group: ManipulatorGroup, epsilon: float,
            rng: SplitMix64) -> OpinionState:
    """Each agent averages with one random partner if it is within epsilon.

    Partners are drawn uniformly from the other N+K-1 extended agents, so the
    manipulator group is drawn with multiplicity K.
    """
    x, t, rng.counter, _, _ = kernels.dw_run(
        state.opinions, *_sched_args(group), epsilon, state.time, state.time + 1,
        rng.seed, rng.counter, -1, 0)
    return OpinionState(x, t)


def _weighted_step(kind: ModelKind, state, group, epsilon, weights, rng):
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (state.n, state.n + group.k):
        raise ValueError(f"weight matrix must be {state.n}x{state.n + group.k}, got {weights.shape}")
    x, rng.counter, _, over = kernels.weighted_run(
        _WEIGHTED_MODE[kind], state.opinions, weights, *_sched_args(group), epsilon,
        state.time, state.time + 1, rng.seed, rng.counter)
    return OpinionState(_checked(x, over), state.time + 1)


def awhk_step(state, group, epsilon, weights, rng) -> OpinionState:
    """Attractive weighted HK: move toward a random partner inside epsilon."""
    return _weighted_step(ModelKind.AWHK, state, group, epsilon, weights, rng)


def rwhk_step(state, group, epsilon, weights, rng) -> OpinionState:
    """Repulsive weighted HK: move away from a random partner beyond epsilon."""
    return _weighted_step(ModelKind.RWHK, state, group, epsilon, weights, rng)


def arwhk_step(state, group, epsilon, weights, rng) -> OpinionState:
    return _weighted_step(ModelKind.ARWHK, state, group, epsilon, weights, rng)


def sample_weight_matrix(n_normal: int, k_manip: int, rng: SplitMix64) -> np.ndarray:
    """N x (N+K) trust weights, i.i.d. uniform on [0, 1), row-major draws."""
    if n_normal < 1 or k_manip < 0:
        raise ValueError("need n_normal >= 1 and k_manip >= 0")
    cols = n_normal + k_manip
    return rng.uniforms(n_normal * cols).reshape(n_normal, cols)


def run_simulation(
    model: ModelSpec,
    init: OpinionState,
    group: ManipulatorGroup,
    stop: Optional[StopRule] = None,
    horizon: Optional[int] = None,
    snapshot_times: Iterable[int] = (),
    rng: Optional[SplitMix64] = None,
) -> Trajectory:
    """Iterate ``model`` from ``init`` until its stop rule fires or ``horizon``.

    Snapshots are kept at every requested time the run reaches, plus the
    final state. Stop rules for HK and DW are not checked while the
    manipulator group is still ramping (t < t_delta), since a stalled
    population can still be picked up by a moving group. Weighted models
    need a weight matrix in ``model.weights`` or draw one from ``rng`` first.
    """
    kind = model.kind
    stop = stop or StopRule.for_model(kind)
    horizon = default_horizon(kind) if horizon is None else horizon
    if horizon < init.time:
        raise ValueError("horizon precedes the initial time")
    if kind.stochastic and rng is None:
        raise ValueError(f"{kind.value} needs a random stream")
    if kind is ModelKind.HK and stop.kind is StopKind.ROUNDED_CLUSTERS:
        raise ValueError("the rounded-cluster stop rule is defined for DW only")
    if kind.weighted and stop.kind is not StopKind.FIXED_HORIZON:
        raise ValueError("weighted models run to a fixed horizon")

    weights = None
    if kind.weighted:
        weights = model.weights
        if weights is None:
            weights = sample_weight_matrix(init.n, group.k, rng)
        weights = np.ascontiguousarray(weights, dtype=np.float64)
        if weights.shape != (init.n, init.n + group.k):
            raise ValueError(f"weight matrix must be {init.n}x{init.n + group.k}")

    t_min_stop = max(init.time + 1, group.t_delta if group.k > 0 else 0)
    sched = _sched_args(group)
    eps = model.epsilon
    wanted = sorted({t for t in snapshot_times if init.time <= t <= horizon})

    snapshots: list[OpinionState] = []
    x = np.array(init.opinions)
    t = init.time
    converged = False
    change = 0.0
    if wanted and wanted[0] == t:
        snapshots.append(init)
    targets = [s for s in wanted if s > t]
    if not targets or targets[-1] != horizon:
        targets.append(horizon)

    for target in targets:
        if t >= target:
            continue
        if kind is ModelKind.HK:
            tol = stop.tol if stop.kind is StopKind.MAX_CHANGE else -1.0
            x, t, converged, change = kernels.hk_run(x, *sched, eps, t, target, tol, t_min_stop)
        elif kind is ModelKind.DW:
            if stop.kind is StopKind.MAX_CHANGE:
                raise ValueError("DW uses the rounded-cluster or fixed-horizon stop rule")
            decimals = stop.decimals if stop.kind is StopKind.ROUNDED_CLUSTERS else -1
            x, t, rng.counter, converged, change = kernels.dw_run(
                x, *sched, eps, t, target, rng.seed, rng.counter, decimals, t_min_stop)
        else:
            x, rng.counter, change, over = kernels.weighted_run(
                _WEIGHTED_MODE[kind], x, weights, *sched, eps, t, target, rng.seed, rng.counter)
            _checked(x, over)
            t = target
        if t in wanted or converged or t == horizon:
            snapshots.append(OpinionState(x, t))
        if converged:
            break

    if not snapshots or snapshots[-1].time != t:
        snapshots.append(OpinionState(x, t))

    if converged:
        reason = StopReason.CONVERGED
    elif kind.weighted and change > stop.tol:
        reason = StopReason.OSCILLATING
    else:
        reason = StopReason.HORIZON
    return Trajectory(
        snapshots=snapshots,
        manipulator_opinions=[group.opinion(s.time) for s in snapshots],
        stop_time=t,
        stop_reason=reason,
        weights=weights,
    )
