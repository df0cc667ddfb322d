"""Domain types shared by every model: opinions, manipulator groups, model specs."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

OPINION_MIN = -1.0
OPINION_MAX = 1.0


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class OpinionState:
    """Opinions of the N normal agents at iteration ``time``."""

    opinions: np.ndarray
    time: int = 0

    def __post_init__(self):
        arr = _frozen_array(self.opinions)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("an opinion state needs at least one agent (1-D, N >= 1)")
        if not np.all(np.isfinite(arr)):
            raise ValueError("opinions must be finite")
        if arr.min() < OPINION_MIN or arr.max() > OPINION_MAX:
            raise ValueError("opinions must lie in [-1, 1]")
        if self.time < 0:
            raise ValueError("time must be non-negative")
        object.__setattr__(self, "opinions", arr)

    @property
    def n(self) -> int:
        return self.opinions.shape[0]

    def __eq__(self, other):
        if not isinstance(other, OpinionState):
            return NotImplemented
        return self.time == other.time and np.array_equal(self.opinions, other.opinions)

    def __hash__(self):
        return hash((self.time, self.opinions.tobytes()))


@dataclass(frozen=True)
class ManipulatorGroup:
    """K agents sharing one opinion that ramps linearly, then stays put.

    ``t_delta = 0`` means the group is stubborn at ``f_end`` from the start.
    """

    k: int = 0
    f_start: float = -1.0
    f_end: float = 1.0
    t_delta: int = 0

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("group size k must be non-negative")
        if self.t_delta < 0:
            raise ValueError("t_delta must be non-negative")
        for name in ("f_start", "f_end"):
            v = getattr(self, name)
            if not OPINION_MIN <= v <= OPINION_MAX:
                raise ValueError(f"{name}={v} outside [-1, 1]")

    @property
    def slope(self) -> float:
        if self.t_delta == 0:
            return 0.0
        return (self.f_end - self.f_start) / self.t_delta

    def opinion(self, t: int) -> float:
        if t >= self.t_delta:
            return float(self.f_end)
        # same expression as the kernels' schedule
        return self.f_start + self.slope * t

    @classmethod
    def none(cls) -> "ManipulatorGroup":
        return cls(k=0, f_start=0.0, f_end=0.0, t_delta=0)


def schedule_opinion(group: ManipulatorGroup, t: int) -> float:
    if t < 0:
        raise ValueError("t must be non-negative")
    return group.opinion(t)


class ModelKind(str, enum.Enum):
    HK = "HK"
    DW = "DW"
    AWHK = "AWHK"
    RWHK = "RWHK"
    ARWHK = "ARWHK"

    @property
    def weighted(self) -> bool:
        return self in (ModelKind.AWHK, ModelKind.RWHK, ModelKind.ARWHK)

    @property
    def stochastic(self) -> bool:
        return self is not ModelKind.HK


@dataclass(frozen=True, eq=False)
class ModelSpec:
    kind: ModelKind
    epsilon: float
    weights: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.weights is not None:
            if not self.kind.weighted:
                raise ValueError(f"{self.kind.value} does not take a weight matrix")
            w = _frozen_array(self.weights)
            if w.ndim != 2 or w.size and (w.min() < 0.0 or w.max() > 1.0):
                raise ValueError("weights must be a 2-D matrix with entries in [0, 1]")
            object.__setattr__(self, "weights", w)


def extended_opinions(state: OpinionState, group: ManipulatorGroup, t: Optional[int] = None) -> np.ndarray:
    """Normal opinions followed by K copies of the group's opinion at ``t``."""
    t = state.time if t is None else t
    manip = np.full(group.k, schedule_opinion(group, t))
    return np.concatenate([state.opinions, manip])


def confidence_set(z: Sequence[float], i: int, epsilon: float) -> list[int]:
    """Indices k with ``|z[i] - z[k]| <= epsilon`` (0-based, includes i)."""
    z = np.asarray(z, dtype=np.float64)
    if not 0 <= i < z.shape[0]:
        raise IndexError(f"agent index {i} out of range for {z.shape[0]} opinions")
    return np.flatnonzero(np.abs(z[i] - z) <= epsilon).tolist()


def equispaced(a: float, b: float, n: int) -> np.ndarray:
    """``a + (b - a) * i / (n + 1)`` for i = 1..n, endpoints excluded."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not OPINION_MIN <= a <= b <= OPINION_MAX:
        raise ValueError("need -1 <= a <= b <= 1")
    return a + (b - a) * np.arange(1, n + 1) / (n + 1)


def uniform_random(n: int, rng, a: float = OPINION_MIN, b: float = OPINION_MAX) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be >= 1")
    return a + (b - a) * rng.uniforms(n)
