"""Closed-form two-group HK dynamics.

One cluster of N normal agents at x(t) interacting with K manipulators whose
opinion ramps as f(t) = f0 + lambda*t. While the two stay within epsilon,
x(t+1) = (K f(t) + N x(t)) / (K + N) and the gap g = f - x obeys
g(t+1) = (N g(t) + lambda (K + N)) / (K + N).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels

# relative slack on |gap| <= eps; the gap recurrence overshoots by ~1 ulp at the boundary
BOUNDARY_RTOL = 1e-12


@dataclass(frozen=True)
class TwoGroupSystem:
    n_normal: int
    k_manip: int
    x0: float
    f0: float
    lam: float
    epsilon: float

    def __post_init__(self):
        if self.n_normal < 1 or self.k_manip < 1:
            raise ValueError("need N >= 1 and K >= 1")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")

    @property
    def valid_at_start(self) -> bool:
        return abs(self.f0 - self.x0) <= self.epsilon


def influence_bound(k: int, n: int, epsilon: float) -> float:
    """Largest |slope| K*eps/(K+N) a group of K can sustain over N followers."""
    if k < 0 or n < 1 or not epsilon > 0:
        raise ValueError("need k >= 0, n >= 1, epsilon > 0")
    return k * epsilon / (k + n)


def gap_closed_form(sys: TwoGroupSystem, t) -> np.ndarray | float:
    """f(t) - x(t) while the groups stay within epsilon of each other."""
    n, k = sys.n_normal, sys.k_manip
    if k == 0:
        raise ValueError("closed form needs K >= 1")
    ratio = n / (k + n)
    decay = ratio ** np.asarray(t, dtype=np.float64)
    out = decay * (sys.f0 - sys.x0) + sys.lam * (k + n) / k * (1.0 - decay)
    return float(out) if np.ndim(out) == 0 else out


def holds_forever(sys: TwoGroupSystem) -> bool:
    return sys.valid_at_start and abs(sys.lam) <= influence_bound(sys.k_manip, sys.n_normal, sys.epsilon)


def gap_recurrence(sys: TwoGroupSystem, steps: int) -> np.ndarray:
    """Gaps g(0..steps) from the one-step recurrence (no detachment check)."""
    n, k = sys.n_normal, sys.k_manip
    g = np.empty(steps + 1)
    g[0] = sys.f0 - sys.x0
    step = sys.lam * (k + n)
    for t in range(steps):
        g[t + 1] = (n * g[t] + step) / (k + n)
    return g


def detachment_time(sys: TwoGroupSystem, horizon: int) -> Optional[int]:
    """First t <= horizon at which the manipulators leave the cluster's reach."""
    if not sys.valid_at_start:
        raise ValueError("the groups must start within epsilon of each other")
    n, k = sys.n_normal, sys.k_manip
    limit = sys.epsilon * (1.0 + BOUNDARY_RTOL)
    g = sys.f0 - sys.x0
    step = sys.lam * (k + n)
    for t in range(1, horizon + 1):
        g = (n * g + step) / (k + n)
        if abs(g) > limit:
            return t
    return None


def merge_groups(normal_groups: Sequence[tuple[int, float]],
                 manip_groups: Sequence[tuple[int, float]] = ()) -> float:
    """Common opinion after one HK step when all groups share one epsilon-ball."""
    groups = list(normal_groups) + list(manip_groups)
    if not groups:
        raise ValueError("need at least one group")
    mass = sum(size for size, _ in groups)
    if mass <= 0:
        raise ValueError("groups must have positive total size")
    return (sum(k * f for k, f in manip_groups) + sum(n * x for n, x in normal_groups)) / mass


def simulate_gap(sys: TwoGroupSystem, steps: int) -> np.ndarray:
    """Gap f(t) - x(t) produced by the actual HK kernel on N identical agents.

    HK updates commute with translations, so the kernel runs in the frame
    that moves with the manipulators (their opinion pinned at 0, normal
    opinions shifted by -lam after every step). This keeps all magnitudes
    near epsilon: in absolute coordinates an unbounded ramp reaches |f| >> 1
    and rounding at that scale can push a gap sitting exactly on epsilon over
    the edge, detaching groups that mathematically stay in contact.
    """
    rel = np.full(sys.n_normal, sys.x0 - sys.f0, dtype=np.float64)
    gaps = np.empty(steps + 1)
    gaps[0] = sys.f0 - sys.x0
    for t in range(steps):
        rel, _, _, _ = kernels.hk_run(rel, sys.k_manip, 0.0, 0.0, 0.0, 0,
                                      sys.epsilon, t, t + 1, -1.0, 0)
        rel = rel - sys.lam
        gaps[t + 1] = -rel[0]
    return gaps
