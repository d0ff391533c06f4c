import os
import subprocess
import sys

import numpy as np
import pytest

from bnetlab import _kernels as K
from bnetlab._accel import HAVE_NUMBA, numba_enabled

pytestmark = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")

SEEDS = np.array([0, 1, 2**40 + 3, 2**63 + 11, 2**64 - 1], dtype=np.uint64)


@pytest.mark.parametrize("beta", [0.0, 0.05, 0.5, 1.0])
def test_site_states(beta):
    x = np.arange(-300, 301)
    t = np.arange(x.size) % 17
    for s in SEEDS:
        a = K.site_states(s, beta, x, t, impl="numba")
        b = K.site_states(s, beta, x, t, impl="numpy")
        assert np.array_equal(a, b)


@pytest.mark.parametrize("side,dual", [(0, False), (1, False), (0, True), (1, True)])
def test_trace(side, dual):
    x0 = np.array([-10, 0, 4]) + (1 if dual else 0)
    for s in SEEDS:
        a = K.trace(s, 0.3, x0, 40, 40, side, dual, -200, 200, impl="numba")
        b = K.trace(s, 0.3, x0, 40, 40, side, dual, -200, 200, impl="numpy")
        assert np.array_equal(a, b)


def test_trace_boundary_raises_in_both():
    for impl in ("numba", "numpy"):
        with pytest.raises(K.BoundaryError):
            K.trace(0, 1.0, [0], 0, 50, 1, False, -5, 5, impl=impl)


def test_pair_gaps():
    a = K.pair_gaps(SEEDS, 0.2, 300, -310, 310, impl="numba")
    b = K.pair_gaps(SEEDS, 0.2, 300, -310, 310, impl="numpy")
    assert np.array_equal(a, b)


def test_step_with_edges():
    xs = np.arange(-50, 51, 2)
    for s in SEEDS:
        for t in (0, 1):
            xs_t = xs + t
            a = K.step_with_edges(s, 0.4, xs_t, t, impl="numba")
            b = K.step_with_edges(s, 0.4, xs_t, t, impl="numpy")
            for u, v in zip(a, b):
                assert np.array_equal(u, v)


def test_evolve_pruned():
    start = np.arange(-120, 121, 2)
    for s in SEEDS:
        a = K.evolve_pruned(s, 0.25, start, 0, 60, -200, 200, -20, 20, impl="numba")
        b = K.evolve_pruned(s, 0.25, start, 0, 60, -200, 200, -20, 20, impl="numpy")
        assert np.array_equal(a, b)


def test_flux_events():
    for s in SEEDS:
        a = K.flux_events(s, 0.2, 200, -402, impl="numba")
        b = K.flux_events(s, 0.2, 200, -402, impl="numpy")
        assert np.array_equal(a, b)


def test_wedge_closed():
    seeds = np.arange(300, dtype=np.uint64)
    a = K.wedge_closed(seeds, 0.1, -5, 5, 40, impl="numba")
    b = K.wedge_closed(seeds, 0.1, -5, 5, 40, impl="numpy")
    assert np.array_equal(a, b) and 0 < a.sum() < a.size
    with pytest.raises(ValueError):
        K.wedge_closed(seeds, 0.1, -4, 4, 40)


def test_lr_terminal():
    rng = np.random.default_rng(0)
    n = 400
    dBl, dBr, Zs = (rng.normal(0, np.sqrt(0.01), (6, n)) for _ in range(3))
    U = rng.random((6, n))
    for l0, r0 in [(0.0, 0.0), (0.3, 0.0), (0.0, 0.5)]:
        a = K.lr_terminal(dBl, dBr, Zs, U, l0, r0, 0.01, 2.0, impl="numba")
        b = K.lr_terminal(dBl, dBr, Zs, U, l0, r0, 0.01, 2.0, impl="numpy")
        assert np.allclose(a, b, rtol=0, atol=1e-12, equal_nan=True)


def test_env_switch_selects_numpy():
    assert numba_enabled() == (os.environ.get("BNETLAB_DISABLE_NUMBA", "") == "")
    code = ("import numpy as np; from bnetlab import _kernels as K; from bnetlab._accel import numba_enabled;"
            "print(numba_enabled(), K.pair_gaps(np.arange(5, dtype=np.uint64), 0.2, 100, -110, 110).tolist())")
    runs = {}
    for flag in ("1", ""):
        env = dict(os.environ, BNETLAB_DISABLE_NUMBA=flag)
        runs[flag] = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                                    check=True).stdout.split(" ", 1)
    assert runs["1"][0] == "False" and runs[""][0] == "True"
    assert runs["1"][1] == runs[""][1]
