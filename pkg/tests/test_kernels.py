import math

import numpy as np
import pytest

from mpmp import kernels
from mpmp._portgrid_py import _dirichlet, objective_grid as grid_py

from conftest import make_rng


def random_args(rng, n_paths=9, n_x=64, n_h=4, n_v=8):
    lam = 7.69e-3
    return (
        rng.uniform(0.05, 1.0, n_paths),
        rng.uniform(-math.pi, math.pi, n_paths),
        rng.uniform(-4000, 4000, n_paths),
        rng.uniform(-1, 1, n_paths),
        rng.uniform(-1, 1, n_paths),
        rng.uniform(-1, 1, n_paths),
        n_h,
        n_v,
        lam / 2,
        lam / 2,
        lam,
        rng.uniform(0, 2e-3),
        rng.uniform(0, 8e-3),
        np.linspace(0.0, 0.15, n_x),
    )


def test_dirichlet_regular():
    y = np.array([0.3, 1.0, -2.0])
    np.testing.assert_allclose(_dirichlet(5, y), np.sin(2.5 * y) / np.sin(0.5 * y), rtol=1e-12)


def test_dirichlet_limits():
    # at y = 2 pi k the ratio tends to n * (-1)^(k (n-1))
    for n in (2, 3, 8):
        for k in (-1, 0, 1):
            y = np.array([2 * math.pi * k])
            expected = n * (-1.0) ** (k * (n - 1))
            assert _dirichlet(n, y)[0] == pytest.approx(expected)
            # approach from nearby: consistent with the limit
            y_near = np.array([2 * math.pi * k + 1e-7])
            assert _dirichlet(n, y_near)[0] == pytest.approx(expected, abs=1e-5)


@pytest.mark.skipif(kernels.backend() != "cython", reason="compiled kernel unavailable")
def test_backend_parity():
    rng = make_rng(11)
    for trial in range(8):
        args = random_args(rng, n_paths=rng.integers(1, 24))
        a = kernels.objective_grid(*args)
        b = grid_py(*args)
        scale = max(np.max(np.abs(b)), 1e-30)
        assert np.max(np.abs(a - b)) / scale < 1e-12


def test_single_path_no_cross_terms():
    rng = make_rng(12)
    args = random_args(rng, n_paths=1)
    out = grid_py(*args)
    w, _, dop, _, _, cea = (args[i] for i in range(6))
    lam, t, dt, x = args[10], args[11], args[12], args[13]
    vs = math.pi * dop[0] * dt + math.pi * cea[0] / lam * x
    expected = 4.0 * args[6] * args[7] * w[0] ** 2 * np.sin(vs) ** 2
    np.testing.assert_allclose(out, expected, rtol=1e-12)


def test_env_var_forces_python(monkeypatch):
    import importlib

    monkeypatch.setenv("MPMP_PURE_PYTHON", "1")
    mod = importlib.reload(kernels)
    assert mod.backend() == "python"
    monkeypatch.delenv("MPMP_PURE_PYTHON")
    mod = importlib.reload(kernels)
    assert mod.objective_grid is mod._impl.objective_grid
