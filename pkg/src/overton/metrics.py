"""Summaries of an opinion distribution.

Two proxies for where the bulk of opinion sits: mean / standard deviation,
and the primary-cluster interval. The latter smooths the opinions with a
Gaussian kernel on a fixed grid, takes the local maxima as candidate
clusters, gives each an effective weight W = w / sum(w^2) with
w = S(peak) / sum S(peaks), drops those with W < delta and reports the
center and half-width of the surviving range.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

DEFAULT_H = 200
DEFAULT_ALPHA = 0.1
DEFAULT_GAP_TOLERANCE = 1e-3


def _as_opinions(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError("need at least one opinion")
    return arr


def mean_std(x) -> tuple[float, float]:
    """Mean and population (1/N) standard deviation."""
    arr = _as_opinions(x)
    return float(arr.mean()), float(arr.std())


@dataclass(frozen=True)
class ClusterSet:
    representatives: tuple[float, ...]
    sizes: tuple[int, ...]
    gap_tolerance: float

    def __len__(self) -> int:
        return len(self.sizes)

    @property
    def clusters(self) -> list[tuple[float, int]]:
        return list(zip(self.representatives, self.sizes))


def detect_clusters(x, gap_tolerance: float = DEFAULT_GAP_TOLERANCE) -> ClusterSet:
    """Split the sorted opinions wherever consecutive values differ by more
    than ``gap_tolerance``; each cluster is reported as (mean, size)."""
    arr = np.sort(_as_opinions(x))
    cuts = np.flatnonzero(np.diff(arr) > gap_tolerance) + 1
    parts = np.split(arr, cuts)
    return ClusterSet(
        representatives=tuple(float(p.mean()) for p in parts),
        sizes=tuple(int(p.size) for p in parts),
        gap_tolerance=gap_tolerance,
    )


def grid(h: int = DEFAULT_H) -> np.ndarray:
    """Midpoints r_k = -1 + (2k - 1)/h of h equal cells covering [-1, 1]."""
    return -1.0 + (2.0 * np.arange(1, h + 1) - 1.0) / h


@dataclass(frozen=True, eq=False)
class SmoothedDensity:
    r: np.ndarray
    values: np.ndarray
    h: int
    alpha: float
    epsilon: float


def smooth_density(x, epsilon: float, h: int = DEFAULT_H, alpha: float = DEFAULT_ALPHA) -> SmoothedDensity:
    if h < 2:
        raise ValueError("h must be at least 2")
    if not (alpha > 0 and epsilon > 0):
        raise ValueError("alpha and epsilon must be positive")
    arr = _as_opinions(x)
    r = grid(h)
    width = alpha * epsilon
    values = np.exp(-(((arr[None, :] - r[:, None]) / width) ** 2)).sum(axis=1)
    return SmoothedDensity(r=r, values=values, h=h, alpha=alpha, epsilon=epsilon)


def find_local_maxima(S) -> np.ndarray:
    """Indices of local maxima of a sampled curve.

    Runs of equal values are treated as one point reported at their leftmost
    index; a run is a maximum when every existing neighbour is strictly
    lower. A curve that is flat everywhere has its single maximum at 0.
    """
    v = np.asarray(S.values if isinstance(S, SmoothedDensity) else S, dtype=np.float64)
    if v.size == 0:
        return np.empty(0, dtype=np.int64)
    starts = np.concatenate([[0], np.flatnonzero(np.diff(v) != 0) + 1])
    ends = np.concatenate([starts[1:] - 1, [v.size - 1]])
    level = v[starts]
    left_ok = np.ones(starts.size, dtype=bool)
    right_ok = np.ones(starts.size, dtype=bool)
    left_ok[1:] = v[starts[1:] - 1] < level[1:]
    right_ok[:-1] = v[ends[:-1] + 1] < level[:-1]
    return starts[left_ok & right_ok].astype(np.int64)


def effective_weights(S, maxima) -> np.ndarray:
    """W_i = w_i / sum_j w_j^2 with w_i the peak's share of the summed peak heights."""
    v = np.asarray(S.values if isinstance(S, SmoothedDensity) else S, dtype=np.float64)
    idx = np.asarray(maxima, dtype=np.int64)
    if idx.size == 0:
        raise ValueError("need at least one maximum")
    peaks = v[idx]
    w = peaks / peaks.sum()
    return w / np.sum(w * w)


@dataclass(frozen=True, eq=False)
class PrimaryClusterReport:
    density: SmoothedDensity
    maxima: np.ndarray
    raw_weights: np.ndarray
    weights: np.ndarray
    primary: np.ndarray  # grid positions of the surviving clusters
    delta: float
    center: float
    amplitude: float
    fallback: bool = False

    @property
    def n_primary(self) -> int:
        return int(self.primary.size)


def primary_interval(x, epsilon: float, delta: float = 0.5, h: int = DEFAULT_H,
                     alpha: float = DEFAULT_ALPHA) -> PrimaryClusterReport:
    """Center and amplitude of the range spanned by the primary clusters.

    When the screening removes every cluster, the one with the largest
    effective weight is kept so the result is always defined.
    """
    dens = smooth_density(x, epsilon, h, alpha)
    maxima = find_local_maxima(dens)
    peaks = dens.values[maxima]
    raw = peaks / peaks.sum()
    W = effective_weights(dens, maxima)
    keep = W >= delta
    fallback = not keep.any()
    if fallback:
        keep = np.zeros_like(keep)
        keep[int(np.argmax(W))] = True
    rbar = dens.r[maxima[keep]]
    hi, lo = float(rbar.max()), float(rbar.min())
    return PrimaryClusterReport(
        density=dens,
        maxima=maxima,
        raw_weights=raw,
        weights=W,
        primary=rbar,
        delta=delta,
        center=0.5 * (hi + lo),
        amplitude=0.5 * (hi - lo),
        fallback=fallback,
    )


def summarize(x, epsilon: float, delta: float = 0.5, h: int = DEFAULT_H,
              alpha: float = DEFAULT_ALPHA, gap_tolerance: float = DEFAULT_GAP_TOLERANCE) -> dict:
    """Both proxies for one opinion vector, as plain floats and ints."""
    mean, std = mean_std(x)
    clusters = detect_clusters(x, gap_tolerance)
    rep = primary_interval(x, epsilon, delta, h, alpha)
    return {
        "mean": mean,
        "std": std,
        "n_clusters": len(clusters),
        "clusters": [[c, s] for c, s in clusters.clusters],
        "center": rep.center,
        "amplitude": rep.amplitude,
        "n_primary": rep.n_primary,
        "effective_weights": rep.weights.tolist(),
    }


def weight_histogram(weights: Sequence[float], edges=None) -> tuple[np.ndarray, np.ndarray]:
    """Counts of effective weights in fixed bins; the last bin is open-ended."""
    if edges is None:
        edges = np.append(np.round(np.arange(0.0, 2.0 + 1e-9, 0.05), 10), np.inf)
    counts, _ = np.histogram(np.asarray(weights, dtype=np.float64), bins=edges)
    return np.asarray(edges), counts
