"""Pure numpy implementation of the iteration kernels.

Every routine here has a twin in ``_fast.pyx`` performing the same IEEE
operations in the same order, so both backends produce bit-identical
trajectories. Keep them in lockstep when editing either one.
"""

import numpy as np

GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
INV_2_53 = 1.0 / 9007199254740992.0

ATTRACTIVE, REPULSIVE, ATTRACTIVE_REPULSIVE = 0, 1, 2

_U64 = np.uint64


def splitmix_u64(seed, counter, n):
    """Outputs ``counter+1 .. counter+n`` of the SplitMix64 stream ``seed``."""
    k = np.arange(counter + 1, counter + n + 1, dtype=_U64)
    z = k * _U64(GOLDEN_GAMMA) + _U64(seed & 0xFFFFFFFFFFFFFFFF)
    z = (z ^ (z >> _U64(30))) * _U64(MIX1)
    z = (z ^ (z >> _U64(27))) * _U64(MIX2)
    return z ^ (z >> _U64(31))


def splitmix_uniforms(seed, counter, n):
    z = splitmix_u64(seed, counter, n)
    return (z >> _U64(11)).astype(np.float64) * INV_2_53


def _schedule(t, f_start, slope, f_end, t_delta):
    if t >= t_delta:
        return f_end
    return f_start + slope * t


def _partners(u, n, k):
    # index into the extended population 0..n+k-1, never the agent itself
    m = n + k - 1
    r = (u * m).astype(np.int64)
    np.minimum(r, m - 1, out=r)
    r += r >= np.arange(n)
    return r


def hk_run(x, k, f_start, slope, f_end, t_delta, eps, t0, t1, tol, t_min_stop):
    """Simultaneous HK iterations from ``t0`` until ``t1`` or convergence.

    Returns ``(x, t_end, converged, last_change)``. ``tol < 0`` disables the
    stop rule.
    """
    x = np.array(x, dtype=np.float64)
    n = x.shape[0]
    kf = float(k)
    t = t0
    converged = False
    change = 0.0
    while t < t1:
        f = _schedule(t, f_start, slope, f_end, t_delta)
        order = np.argsort(x, kind="stable")
        xs = x[order]
        inside = np.abs(xs[:, None] - xs[None, :]) <= eps
        cnt = inside.sum(axis=1)
        lo = inside.argmax(axis=1)
        hi = lo + cnt
        prefix = np.empty(n + 1)
        prefix[0] = 0.0
        np.cumsum(xs, out=prefix[1:])
        s = prefix[hi] - prefix[lo]
        c = cnt.astype(np.float64)
        if k > 0:
            with_manip = np.abs(xs - f) <= eps
            s = np.where(with_manip, s + kf * f, s)
            c = np.where(with_manip, c + kf, c)
        else:
            with_manip = np.zeros(n, dtype=bool)
        new = s / c
        flat = (xs[lo] == xs[hi - 1]) & (~with_manip | (xs == f))
        new = np.where(flat, xs, new)
        out = np.empty(n)
        out[order] = new
        change = float(np.max(np.abs(out - x)))
        x = out
        t += 1
        if tol >= 0.0 and t >= t_min_stop and change <= tol:
            converged = True
            break
    return x, t, converged, change


def _rounded_separated(x, f, include_f, decimals, eps):
    scale = 10.0 ** decimals
    vals = np.rint(x * scale) / scale
    if include_f:
        vals = np.append(vals, np.rint(f * scale) / scale)
    vals = np.sort(vals)
    d = np.diff(vals)
    return bool(np.all((d == 0.0) | (d > eps)))


def dw_run(x, k, f_start, slope, f_end, t_delta, eps, t0, t1, seed, counter,
           decimals, t_min_stop):
    """Simultaneous DW iterations. ``decimals < 0`` disables the stop rule.

    Returns ``(x, t_end, counter, converged, last_change)``.
    """
    x = np.array(x, dtype=np.float64)
    n = x.shape[0]
    t = t0
    converged = False
    change = 0.0
    m = n + k - 1
    while t < t1:
        f = _schedule(t, f_start, slope, f_end, t_delta)
        if m > 0:
            u = splitmix_uniforms(seed, counter, n)
            counter += n
            r = _partners(u, n, k)
            z = np.where(r < n, x[np.minimum(r, n - 1)], f)
            new = np.where(np.abs(x - z) <= eps, (x + z) / 2.0, x)
        else:
            new = x.copy()
        change = float(np.max(np.abs(new - x)))
        x = new
        t += 1
        if decimals >= 0 and t >= t_min_stop:
            f_next = _schedule(t, f_start, slope, f_end, t_delta)
            if _rounded_separated(x, f_next, k > 0 and t >= t_delta, decimals, eps):
                converged = True
                break
    return x, t, counter, converged, change


def weighted_run(mode, x, weights, k, f_start, slope, f_end, t_delta, eps,
                 t0, t1, seed, counter):
    """Weighted HK iterations (attractive / repulsive / both) to ``t1``.

    Returns ``(x, counter, last_change, overshoot)`` where ``overshoot`` is
    the largest excursion beyond [-1, 1] removed by the safety clamp.
    """
    x = np.array(x, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    n = x.shape[0]
    rows = np.arange(n)
    m = n + k - 1
    t = t0
    change = 0.0
    overshoot = 0.0
    while t < t1:
        f = _schedule(t, f_start, slope, f_end, t_delta)
        if m > 0:
            u = splitmix_uniforms(seed, counter, n)
            counter += n
            r = _partners(u, n, k)
            z = np.where(r < n, x[np.minimum(r, n - 1)], f)
            w = weights[rows, r]
            s = np.sign(x - z)
            move = np.abs(x + w * z) / 2.0 * (1.0 - np.abs(x))
            inside = np.abs(x - z) <= eps
            if mode == ATTRACTIVE:
                new = np.where(inside, x - s * move, x)
            elif mode == REPULSIVE:
                new = np.where(inside, x, x + s * move)
            else:
                new = np.where(inside, x - s * move, x + s * move)
            excess = np.abs(new) - 1.0
            overshoot = max(overshoot, float(excess.max()))
            new = np.clip(new, -1.0, 1.0)
        else:
            new = x.copy()
        change = float(np.max(np.abs(new - x)))
        x = new
        t += 1
    return x, counter, change, overshoot
