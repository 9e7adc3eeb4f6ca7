import numpy as np
import pytest

from waverc.medium import MediumConfig


@pytest.fixture
def fast_cfg():
    """Small lattice with the default dynamical regime, for quick tests."""
    return MediumConfig(lattice_len=32, exciter_ports=(12, 20),
                        detector_ports=(14, 18))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
