import json
import os
import subprocess
import sys

import numpy as np
import pytest

from mosci import kernels
from mosci.kernels import scalar, vectorized

numba_only = pytest.mark.skipif(not kernels.NUMBA_ENABLED, reason="numba path disabled")


@pytest.fixture(scope="module")
def beta_grid():
    rng = np.random.default_rng(4)
    a = np.concatenate([rng.uniform(0.5, 5, 200), rng.integers(1, 400, 200) + 0.5])
    b = np.concatenate([rng.uniform(0.5, 5, 200), rng.integers(1, 400, 200) + 0.5])
    q = rng.uniform(0.001, 0.999, a.size)
    return q, a, b


def _loop_inv(q, a, b):
    return scalar.betaincinv_loop(q, a, b, np.empty(q.size))


def test_betaincinv_paths_agree(beta_grid):
    q, a, b = beta_grid
    np.testing.assert_allclose(_loop_inv(q, a, b), vectorized.betaincinv(q, a, b), rtol=0, atol=1e-12)


def test_betainc_paths_agree(beta_grid):
    q, a, b = beta_grid
    out = np.empty(q.size)
    scalar.betainc_loop(q, a, b, out)
    np.testing.assert_allclose(out, vectorized.betainc(q, a, b), rtol=0, atol=1e-12)


def test_betaincinv_inverts_betainc(beta_grid):
    q, a, b = beta_grid
    np.testing.assert_allclose(kernels.betainc(kernels.betaincinv(q, a, b), a, b), q, atol=1e-10)


def test_dedup_preserves_order():
    q = np.array([0.975, 0.025, 0.975, 0.5])
    a = np.array([3.0, 3.0, 3.0, 2.0])
    b = np.array([10.0, 10.0, 10.0, 2.0])
    out = kernels.betaincinv(q, a, b)
    assert out[0] == out[2]
    assert out[1] < out[0]
    assert out[3] == pytest.approx(0.5, abs=1e-12)


def test_bca_paths_agree():
    rng = np.random.default_rng(8)
    reps = np.sort(rng.normal(3.0, 0.2, size=(50, 400)), axis=1)
    reps[0] = 2.0  # degenerate row
    theta = reps.mean(axis=1) + rng.normal(0, 0.02, 50)
    theta[0] = 2.0
    accel = rng.uniform(-0.1, 0.1, 50)
    n = reps.shape[0]
    looped = [np.empty(n) for _ in range(4)]
    scalar.bca_bounds_loop(reps, theta, accel, 0.05, *looped)
    vec = vectorized.bca_bounds(reps, theta, accel, 0.05)
    for x, y in zip(looped, vec):
        np.testing.assert_allclose(x, y, rtol=0, atol=1e-13)
    assert looped[0][0] == looped[1][0] == 2.0


@numba_only
def test_kernels_are_compiled():
    assert hasattr(scalar.betaincinv_loop, "signatures")


def test_env_flag_selects_numpy_backend():
    code = (
        "import json, numpy as np, mosci.kernels as k;"
        "from mosci.estimators import clopper_pearson_bounds;"
        "lo, hi = clopper_pearson_bounds(np.array([[3, 5, 7, 4, 1], [0, 0, 20, 0, 0]]));"
        "print(json.dumps([k.BACKEND, lo.tolist(), hi.tolist()]))"
    )
    out = {}
    for flag in ("1", ""):
        env = dict(os.environ, MOSCI_DISABLE_NUMBA=flag)
        proc = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        out[flag] = json.loads(proc.stdout)
    assert out["1"][0] == "numpy"
    np.testing.assert_allclose(out["1"][1], out[""][1], atol=1e-12)
    np.testing.assert_allclose(out["1"][2], out[""][2], atol=1e-12)
