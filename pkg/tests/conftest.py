import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from asymrabi.eigensolver import GroundState
from asymrabi.model import ModelParams

settings.register_profile(
    "repro",
    derandomize=True,
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repro")

OMEGA_SMALL = 0.01
GC_SMALL = 0.05


def state_from(plus, minus, p=None):
    """GroundState wrapper around hand-written amplitudes."""
    plus = np.asarray(plus, dtype=float)
    minus = np.asarray(minus, dtype=float)
    coeffs = np.empty(2 * plus.size)
    coeffs[0::2] = minus
    coeffs[1::2] = plus
    return GroundState(p or ModelParams(omega=1.0), 0.0, coeffs, plus.size, 0.0, 0.0)


@pytest.fixture
def small_omega():
    return ModelParams(omega=OMEGA_SMALL)
