import numpy as np
import pytest

from cdpa_lab.models import CircuitConfig, SignalTrace, TracePair
from cdpa_lab.simulation import simulate_pair

SHORT_CONFIG_TEXT = """
# 1 ms window, 100 samples
circuit.window_start = 0.002
circuit.window_end = 0.003
train.hidden_count = 8
train.max_iterations = 5
sweep.hidden_benn = 5:5:10
sweep.hidden_ewnn = 4, 8
sweep.frequencies = 3000, 3700
sweep.compare_max_iterations = 5
"""


@pytest.fixture(scope="session")
def default_traces() -> TracePair:
    """Default 3700 Hz simulation over 10-20 ms"""
    return simulate_pair(CircuitConfig())


@pytest.fixture(scope="session")
def short_circuit() -> CircuitConfig:
    return CircuitConfig(window_start=2e-3, window_end=3e-3)


@pytest.fixture(scope="session")
def short_traces(short_circuit) -> TracePair:
    return simulate_pair(short_circuit)


@pytest.fixture
def toy_pair() -> TracePair:
    """Small synthetic input/output pair for training tests"""
    t = np.arange(20) / 20.0
    return TracePair(
        input=SignalTrace.from_array(np.sin(2 * np.pi * t), sample_rate=20.0),
        output=SignalTrace.from_array(0.5 * np.sin(2 * np.pi * t - 0.3), sample_rate=20.0),
    )


@pytest.fixture
def experiment_file(tmp_path):
    path = tmp_path / "experiment.cfg"
    path.write_text(SHORT_CONFIG_TEXT, encoding="utf-8")
    return path
