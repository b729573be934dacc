import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hadamardopt.limits import ShellConfig

settings.register_profile(
    "repo", deadline=None, derandomize=True, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")


@pytest.fixture
def unit_circle():
    th = np.linspace(0.0, 2 * np.pi, 32, endpoint=False)
    return np.stack([np.cos(th), np.sin(th)], axis=1)


@pytest.fixture
def quick_cfg():
    # enough shells for the smooth fixtures, small enough for property tests
    return ShellConfig(shells=10, samples_per_shell=32)
