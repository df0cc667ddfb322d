"""The compiled kernels must reproduce the numpy fallback bit for bit."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from overton.kernels import ATTRACTIVE, ATTRACTIVE_REPULSIVE, REPULSIVE, _pure
from overton.rng import MASK64, SplitMix64

from conftest import equispaced_100, load_fast


def _eq(a, b):
    return np.array_equal(np.asarray(a), np.asarray(b)) and np.asarray(a).dtype == np.asarray(b).dtype


def _same(ra, rb):
    assert len(ra) == len(rb)
    for a, b in zip(ra, rb):
        if isinstance(a, np.ndarray):
            assert _eq(a, b)
        else:
            assert a == b


@given(st.integers(0, MASK64), st.integers(0, 2**40), st.integers(0, 64))
def test_rng_identical(seed, counter, n):
    _fast = load_fast()
    assert _eq(_pure.splitmix_u64(seed, counter, n), _fast.splitmix_u64(seed, counter, n))
    assert _eq(_pure.splitmix_uniforms(seed, counter, n), _fast.splitmix_uniforms(seed, counter, n))


def test_hk_ramp_to_convergence(pure, fast):
    x = -0.6 + 1.2 * np.arange(1, 101) / 101
    args = (15, -0.6, 1.6 / 80, 1.0, 80, 0.1, 0, 5000, 5e-4, 80)
    _same(pure.hk_run(x, *args), fast.hk_run(x, *args))


def test_dw_full_run(pure, fast):
    x = equispaced_100()
    args = (30, -1.0, 2.0 / 900, 1.0, 900, 0.1, 0, 5000, 12345, 0, 3, 900)
    _same(pure.dw_run(x, *args), fast.dw_run(x, *args))


@pytest.mark.parametrize("mode", [ATTRACTIVE, REPULSIVE, ATTRACTIVE_REPULSIVE])
def test_weighted_full_run(pure, fast, mode):
    x = equispaced_100()
    w = SplitMix64(4).uniforms(100 * 300).reshape(100, 300)
    args = (200, -0.9, 1.8 / 25, 0.9, 25, 0.1, 0, 500, 777, 30000)
    _same(pure.weighted_run(mode, x, w, *args), fast.weighted_run(mode, x, w, *args))


opinions = st.lists(st.floats(-1, 1, allow_nan=False), min_size=1, max_size=40).map(np.array)


@given(opinions, st.integers(0, 20), st.floats(-1, 1), st.floats(-1, 1), st.integers(0, 60),
       st.floats(0.01, 1.0), st.integers(1, 80))
def test_hk_random(x, k, a, b, td, eps, steps):
    _fast = load_fast()
    slope = 0.0 if td == 0 else (b - a) / td
    args = (k, a, slope, b, td, eps, 0, steps, 5e-4, td)
    _same(_pure.hk_run(x, *args), _fast.hk_run(x, *args))


@given(opinions, st.integers(0, 20), st.floats(-1, 1), st.integers(0, 60), st.floats(0.01, 1.0),
       st.integers(1, 80), st.integers(0, MASK64), st.sampled_from([-1, 3]))
def test_dw_random(x, k, b, td, eps, steps, seed, decimals):
    _fast = load_fast()
    if x.size + k < 2:
        x = np.append(x, 0.0)
    slope = 0.0 if td == 0 else (b + 1.0) / td
    args = (k, -1.0, slope, b, td, eps, 0, steps, seed, 0, decimals, td)
    _same(_pure.dw_run(x, *args), _fast.dw_run(x, *args))


@given(opinions, st.integers(0, 20), st.integers(0, 60), st.floats(0.01, 1.0), st.integers(1, 60),
       st.integers(0, MASK64), st.sampled_from([ATTRACTIVE, REPULSIVE, ATTRACTIVE_REPULSIVE]))
def test_weighted_random(x, k, td, eps, steps, seed, mode):
    _fast = load_fast()
    if x.size + k < 2:
        x = np.append(x, 0.0)
    n = x.size
    w = SplitMix64(seed).uniforms(n * (n + k)).reshape(n, n + k)
    slope = 0.0 if td == 0 else 1.8 / td
    args = (k, -0.9, slope, 0.9, td, eps, 0, steps, seed, 0)
    _same(_pure.weighted_run(mode, x, w, *args), _fast.weighted_run(mode, x, w, *args))


def test_dw_partner_draws_cover_manipulators(backend):
    """With one normal agent every draw lands on the manipulator group."""
    x, *_ = backend.dw_run(np.array([0.0]), 1, 0.08, 0.0, 0.08, 0, 0.1, 0, 1, 1, 0, -1, 0)
    assert x[0] == 0.04


def test_hk_stop_not_before_min_time(backend):
    # a frozen population would stop at once; t_min_stop holds it to t=10
    x = np.array([-0.9, 0.9])
    _, t, converged, _ = backend.hk_run(x, 0, 0.0, 0.0, 0.0, 0, 0.1, 0, 100, 5e-4, 10)
    assert converged and t == 10


def test_hk_disabled_stop_runs_to_end(backend):
    _, t, converged, _ = backend.hk_run(np.array([0.0]), 0, 0.0, 0.0, 0.0, 0, 0.1, 0, 37, -1.0, 0)
    assert t == 37 and not converged


def _backend_in_subprocess(value):
    import os
    import subprocess
    import sys
    env = dict(os.environ, OVERTON_KERNELS=value)
    return subprocess.run([sys.executable, "-c", "import overton.kernels as k; print(k.BACKEND)"],
                          env=env, capture_output=True, text=True)


def test_backend_selection_by_environment():
    assert _backend_in_subprocess("pure").stdout.strip() == "pure"
    bad = _backend_in_subprocess("turbo")
    assert bad.returncode != 0 and "OVERTON_KERNELS" in bad.stderr
    load_fast()
    assert _backend_in_subprocess("compiled").stdout.strip() == "compiled"
