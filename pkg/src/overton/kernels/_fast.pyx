# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled iteration kernels.

Mirror of ``_pure.py``: identical signatures, identical floating point
operation order. Build without -ffast-math and with -ffp-contract=off so the
two backends stay bit-identical.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, rint
from libc.stdint cimport uint64_t, int64_t
from libc.stdlib cimport malloc, free, qsort

cnp.import_array()

cdef uint64_t GOLDEN_GAMMA = 0x9E3779B97F4A7C15ULL
cdef uint64_t MIX1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t MIX2 = 0x94D049BB133111EBULL
cdef double INV_2_53 = 1.0 / 9007199254740992.0

ATTRACTIVE, REPULSIVE, ATTRACTIVE_REPULSIVE = 0, 1, 2


cdef inline uint64_t _mix(uint64_t seed, uint64_t k) nogil:
    cdef uint64_t z = k * GOLDEN_GAMMA + seed
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    return z ^ (z >> 31)


cdef inline double _uniform(uint64_t seed, uint64_t k) nogil:
    return <double>(_mix(seed, k) >> 11) * INV_2_53


cdef inline double _schedule(int64_t t, double f_start, double slope,
                             double f_end, int64_t t_delta) nogil:
    if t >= t_delta:
        return f_end
    return f_start + slope * <double>t


cdef inline int64_t _partner(double u, int64_t i, int64_t n, int64_t k) nogil:
    cdef int64_t m = n + k - 1
    cdef int64_t r = <int64_t>(u * <double>m)
    if r > m - 1:
        r = m - 1
    if r >= i:
        r += 1
    return r


cdef inline double _sign(double d) nogil:
    if d > 0.0:
        return 1.0
    if d < 0.0:
        return -1.0
    return 0.0


ctypedef struct Keyed:
    double v
    int64_t i


cdef int _cmp_keyed(const void* a, const void* b) noexcept nogil:
    cdef double va = (<Keyed*>a).v
    cdef double vb = (<Keyed*>b).v
    if va < vb:
        return -1
    if va > vb:
        return 1
    return 0


cdef int _cmp_double(const void* a, const void* b) noexcept nogil:
    cdef double va = (<double*>a)[0]
    cdef double vb = (<double*>b)[0]
    if va < vb:
        return -1
    if va > vb:
        return 1
    return 0


def splitmix_u64(seed, counter, n):
    cdef uint64_t s = <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t c = <uint64_t>counter
    cdef Py_ssize_t j, nn = n
    out = np.empty(nn, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    for j in range(nn):
        o[j] = _mix(s, c + 1 + j)
    return out


def splitmix_uniforms(seed, counter, n):
    cdef uint64_t s = <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t c = <uint64_t>counter
    cdef Py_ssize_t j, nn = n
    out = np.empty(nn, dtype=np.float64)
    cdef double[::1] o = out
    for j in range(nn):
        o[j] = _uniform(s, c + 1 + j)
    return out


def hk_run(x, int64_t k, double f_start, double slope, double f_end,
           int64_t t_delta, double eps, int64_t t0, int64_t t1, double tol,
           int64_t t_min_stop):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] arr = np.array(x, dtype=np.float64)
    cdef double[::1] xv = arr
    cdef int64_t n = xv.shape[0]
    cdef double kf = <double>k
    cdef Keyed* keyed = <Keyed*>malloc(n * sizeof(Keyed))
    cdef double* prefix = <double*>malloc((n + 1) * sizeof(double))
    cdef double* out = <double*>malloc(n * sizeof(double))
    cdef int64_t t = t0, p, lo, hi, j
    cdef double f, s, c, v, d, change = 0.0
    cdef bint converged = False, manip
    if keyed == NULL or prefix == NULL or out == NULL:
        free(keyed); free(prefix); free(out)
        raise MemoryError()
    try:
        with nogil:
            while t < t1:
                f = _schedule(t, f_start, slope, f_end, t_delta)
                for j in range(n):
                    keyed[j].v = xv[j]
                    keyed[j].i = j
                qsort(keyed, n, sizeof(Keyed), _cmp_keyed)
                prefix[0] = 0.0
                for j in range(n):
                    prefix[j + 1] = prefix[j] + keyed[j].v
                lo = 0
                hi = 0
                for p in range(n):
                    v = keyed[p].v
                    while fabs(v - keyed[lo].v) > eps:
                        lo += 1
                    if hi < p + 1:
                        hi = p + 1
                    while hi < n and fabs(v - keyed[hi].v) <= eps:
                        hi += 1
                    s = prefix[hi] - prefix[lo]
                    c = <double>(hi - lo)
                    manip = False
                    if k > 0 and fabs(v - f) <= eps:
                        manip = True
                        s = s + kf * f
                        c = c + kf
                    if keyed[lo].v == keyed[hi - 1].v and (not manip or v == f):
                        out[keyed[p].i] = v
                    else:
                        out[keyed[p].i] = s / c
                change = 0.0
                for j in range(n):
                    d = fabs(out[j] - xv[j])
                    if d > change:
                        change = d
                    xv[j] = out[j]
                t += 1
                if tol >= 0.0 and t >= t_min_stop and change <= tol:
                    converged = True
                    break
    finally:
        free(keyed)
        free(prefix)
        free(out)
    return arr, t, bool(converged), change


cdef bint _rounded_separated(double* x, double* buf, int64_t n, double f,
                             bint include_f, int64_t decimals, double eps) noexcept nogil:
    cdef double scale = 10.0 ** decimals
    cdef int64_t j, m = n
    cdef double d
    for j in range(n):
        buf[j] = rint(x[j] * scale) / scale
    if include_f:
        buf[n] = rint(f * scale) / scale
        m = n + 1
    qsort(buf, m, sizeof(double), _cmp_double)
    for j in range(m - 1):
        d = buf[j + 1] - buf[j]
        if not (d == 0.0 or d > eps):
            return False
    return True


def dw_run(x, int64_t k, double f_start, double slope, double f_end,
           int64_t t_delta, double eps, int64_t t0, int64_t t1, seed, counter,
           int64_t decimals, int64_t t_min_stop):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] arr = np.array(x, dtype=np.float64)
    cdef double[::1] xv = arr
    cdef int64_t n = xv.shape[0]
    cdef uint64_t sd = <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t ctr = <uint64_t>counter
    cdef double* new = <double*>malloc(n * sizeof(double))
    cdef double* buf = <double*>malloc((n + 1) * sizeof(double))
    cdef int64_t t = t0, i, r, m = n + k - 1
    cdef double f, z, xi, d, change = 0.0
    cdef bint converged = False
    if new == NULL or buf == NULL:
        free(new); free(buf)
        raise MemoryError()
    try:
        with nogil:
            while t < t1:
                f = _schedule(t, f_start, slope, f_end, t_delta)
                for i in range(n):
                    xi = xv[i]
                    if m > 0:
                        ctr += 1
                        r = _partner(_uniform(sd, ctr), i, n, k)
                        z = xv[r] if r < n else f
                        if fabs(xi - z) <= eps:
                            new[i] = (xi + z) / 2.0
                        else:
                            new[i] = xi
                    else:
                        new[i] = xi
                change = 0.0
                for i in range(n):
                    d = fabs(new[i] - xv[i])
                    if d > change:
                        change = d
                    xv[i] = new[i]
                t += 1
                if decimals >= 0 and t >= t_min_stop:
                    f = _schedule(t, f_start, slope, f_end, t_delta)
                    if _rounded_separated(&xv[0], buf, n, f, k > 0 and t >= t_delta,
                                          decimals, eps):
                        converged = True
                        break
    finally:
        free(new)
        free(buf)
    return arr, t, int(ctr), bool(converged), change


def weighted_run(int mode, x, weights, int64_t k, double f_start, double slope,
                 double f_end, int64_t t_delta, double eps, int64_t t0,
                 int64_t t1, seed, counter):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] arr = np.array(x, dtype=np.float64)
    cdef double[::1] xv = arr
    cdef const double[:, ::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef int64_t n = xv.shape[0]
    cdef uint64_t sd = <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t ctr = <uint64_t>counter
    cdef double* new = <double*>malloc(n * sizeof(double))
    cdef int64_t t = t0, i, r, m = n + k - 1
    cdef double f, z, xi, s, move, v, d, change = 0.0, overshoot = 0.0
    cdef bint inside
    if new == NULL:
        raise MemoryError()
    try:
        with nogil:
            while t < t1:
                f = _schedule(t, f_start, slope, f_end, t_delta)
                for i in range(n):
                    xi = xv[i]
                    if m <= 0:
                        new[i] = xi
                        continue
                    ctr += 1
                    r = _partner(_uniform(sd, ctr), i, n, k)
                    z = xv[r] if r < n else f
                    s = _sign(xi - z)
                    move = fabs(xi + w[i, r] * z) / 2.0 * (1.0 - fabs(xi))
                    inside = fabs(xi - z) <= eps
                    if mode == 0:
                        v = xi - s * move if inside else xi
                    elif mode == 1:
                        v = xi if inside else xi + s * move
                    else:
                        v = xi - s * move if inside else xi + s * move
                    d = fabs(v) - 1.0
                    if d > overshoot:
                        overshoot = d
                    if v > 1.0:
                        v = 1.0
                    elif v < -1.0:
                        v = -1.0
                    new[i] = v
                change = 0.0
                for i in range(n):
                    d = fabs(new[i] - xv[i])
                    if d > change:
                        change = d
                    xv[i] = new[i]
                t += 1
    finally:
        free(new)
    return arr, int(ctr), change, overshoot
