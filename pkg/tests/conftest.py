import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ionleak.emitsim import EmissionConfig, ms_pairs_circuit, synthesize, x_sweep_circuit  # noqa: E402


@pytest.fixture(scope="session")
def quiet_cfg():
    return EmissionConfig(noise_sigma=0.0)


@pytest.fixture(scope="session")
def fig6a(quiet_cfg):
    return synthesize(x_sweep_circuit(n_shots=1), quiet_cfg, seed=1)


@pytest.fixture(scope="session")
def fig6b(quiet_cfg):
    return synthesize(ms_pairs_circuit(n_shots=1), quiet_cfg, seed=2)
