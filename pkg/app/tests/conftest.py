import pytest

from app.config import settings
from app.models.network import NetworkConfig, SimulationConfig, validate


@pytest.fixture
def fig3_config():
    """N=50, K1=10, K2=2, M1=10, M2=20: the hybrid vs generalized comparison point."""
    return validate(NetworkConfig(
        library_size=50, helper_count=10, users_per_helper=2, helper_memory=10.0, user_memory=20.0
    ))


@pytest.fixture
def small_config():
    return validate(NetworkConfig(
        library_size=6, helper_count=2, users_per_helper=3, helper_memory=2.0, user_memory=1.0
    ))


@pytest.fixture
def small_sim():
    return SimulationConfig(file_bits=512, seed=11, request_profile=(1, 2, 3, 4, 5, 6))


@pytest.fixture
def override_settings(monkeypatch, tmp_path):
    """Single-threaded, logs under tmp_path; returns a setter for further overrides."""
    monkeypatch.setattr(settings, "threads", 1)
    monkeypatch.setattr(settings, "log_dir", str(tmp_path / "logs"))

    def apply(**values):
        for name, value in values.items():
            monkeypatch.setattr(settings, name, value)
        return settings

    return apply
