"""
Pytest configuration and shared fixtures
"""
import os

import numpy as np
import pytest


@pytest.fixture
def q_ring():
    """The rational ring"""
    from src.difq_workbench.rings import ring_from_id
    return ring_from_id("Q")


@pytest.fixture
def f7():
    """The prime field F_7"""
    from src.difq_workbench.rings import ring_from_id
    return ring_from_id("Fp:7")


@pytest.fixture
def f5():
    """The prime field F_5"""
    from src.difq_workbench.rings import ring_from_id
    return ring_from_id("Fp:5")


@pytest.fixture
def cfg():
    """Default extrapolation settings"""
    from src.difq_workbench.numdiff import ExtrapConfig
    return ExtrapConfig()


@pytest.fixture
def exp_fn():
    """exp as a smooth map ℝ → ℝ"""
    from src.difq_workbench.numdiff import SmoothFn
    return SmoothFn.scalar(np.exp, 1, "exp")


@pytest.fixture
def square_fn():
    """x ↦ x² as a smooth map ℝ → ℝ"""
    from src.difq_workbench.numdiff import SmoothFn
    return SmoothFn.scalar(lambda a: a * a, 1, "x^2")


@pytest.fixture
def sharp_cfg():
    """Counterexample settings, reduced for unit test speed"""
    from src.difq_workbench.sharplab import SharpConfig
    return SharpConfig(grid_n=512, ode_steps=400)


@pytest.fixture
def out_dir(tmp_path):
    """Temporary output directory for CLI runs"""
    directory = tmp_path / "out"
    directory.mkdir()
    return directory


@pytest.fixture(autouse=True)
def isolated_env(monkeypatch, tmp_path):
    """Clear DIFQ_* variables and run from an empty directory (no stray .env)"""
    for key in list(os.environ):
        if key.startswith("DIFQ_"):
            monkeypatch.delenv(key, raising=False)
    monkeypatch.chdir(tmp_path)
