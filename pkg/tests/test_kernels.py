import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ocbf_merge import kernels
from ocbf_merge._jit import HAS_NUMBA

pytestmark = pytest.mark.skipif(not HAS_NUMBA, reason="numba not installed")


def random_rows(rng, m):
    A = rng.uniform(-3, 3, size=(m, 2))
    A[rng.random(m) < 0.5, 1] = 0.0
    return A, rng.uniform(-10, 10, size=m)


@given(st.integers(0, 2 ** 32 - 1), st.integers(0, 8))
def test_qp_numba_matches_numpy(seed, m):
    rng = np.random.default_rng(seed)
    A, c = random_rows(rng, m)
    u_ref = float(rng.uniform(-6, 6))
    a = kernels.qp_enumerate_numba(A, c, u_ref, 10.0, 1e-9)
    b = kernels._qp_enumerate_numpy(A, c, u_ref, 10.0, 1e-9)
    assert a[0] == b[0]
    if a[0] == kernels.STATUS_OPTIMAL:
        assert a[1] == pytest.approx(b[1], abs=1e-12)
        assert a[2] == pytest.approx(b[2], abs=1e-12)
        assert (a[3], a[4]) == (b[3], b[4])


@given(st.integers(0, 2 ** 32 - 1), st.integers(0, 8))
def test_relaxed_numba_matches_numpy(seed, m):
    rng = np.random.default_rng(seed)
    a = rng.uniform(-3, 3, size=m)
    c = rng.uniform(-20, 20, size=m)
    u_ref = float(rng.uniform(-8, 8))
    x = kernels.relaxed_numba(a, c, u_ref, -5.886, 4.905)
    y = kernels._relaxed_numpy(a, c, u_ref, -5.886, 4.905)
    assert x[0] == pytest.approx(y[0], abs=1e-12)
    assert x[1] == pytest.approx(y[1], rel=1e-12, abs=1e-12)


@given(st.integers(0, 2 ** 32 - 1))
def test_sampling_numba_matches_numpy(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 30))
    seg_t = np.cumsum(rng.uniform(0.01, 1.0, size=n))
    seg_x = rng.uniform(0, 400, size=n)
    seg_v = rng.uniform(0, 30, size=n)
    seg_u = rng.uniform(-6, 5, size=n)
    times = np.sort(rng.uniform(seg_t[0] - 1.0, seg_t[-1] + 1.0, size=200))
    out = [np.empty(200) for _ in range(4)]
    kernels.sample_segments_numba(seg_t, seg_x, seg_v, seg_u, times, out[0], out[1])
    kernels._sample_segments_numpy(seg_t, seg_x, seg_v, seg_u, times, out[2], out[3])
    np.testing.assert_allclose(out[0], out[2], rtol=0, atol=1e-9, equal_nan=True)
    np.testing.assert_allclose(out[1], out[3], rtol=0, atol=1e-9, equal_nan=True)


def test_sampling_before_first_segment_is_nan():
    out_x, out_v = np.empty(2), np.empty(2)
    kernels.sample_segments(np.array([1.0]), np.array([0.0]), np.array([10.0]),
                            np.array([2.0]), np.array([0.5, 1.1]), out_x, out_v)
    assert np.isnan(out_x[0]) and np.isnan(out_v[0])
    assert out_x[1] == pytest.approx(1.0 + 0.01) and out_v[1] == pytest.approx(10.2)


def test_env_flag_selects_numpy_backend():
    code = "from ocbf_merge import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, OCBF_MERGE_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True)
    assert out.stdout.strip() == "numpy"
    env.pop("OCBF_MERGE_DISABLE_NUMBA")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True)
    assert out.stdout.strip() == "numba"


def test_simulation_identical_across_backends():
    code = ("from ocbf_merge import SimConfig, run;"
            "m = run(SimConfig(mode='event_triggered', cav_count=4, rng_seed=5)).metrics;"
            "print(repr((m.qp_solved, m.avg_travel_time, m.avg_half_u2, m.min_b1)))")
    outs = []
    for flag in ("1", "0"):
        env = dict(os.environ, OCBF_MERGE_DISABLE_NUMBA=flag)
        outs.append(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                                   text=True, check=True).stdout)
    a, b = (eval(o) for o in outs)
    assert a[0] == b[0]
    assert np.allclose(a[1:], b[1:], rtol=1e-9, atol=1e-9)
