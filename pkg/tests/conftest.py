import numpy as np
import pytest

from dirtytx import HardwareConfig, SignalSpec


def make_symmetric_hw(kappa2_db=-50.0):
    """Symmetric two-branch hardware used throughout the evaluation setup.

    30 dB amplifier gain on both branches, equal real crosstalk at the
    requested level, rho = -0.025 per watt and -40 dBW noise floor.
    """
    kappa = float(np.sqrt(10.0 ** (kappa2_db / 10.0)))
    gamma = float(np.sqrt(1000.0))
    return HardwareConfig(
        gamma=(gamma, gamma),
        kappa=(kappa, kappa),
        rho=(-0.025, -0.025),
        sigma_w2=1e-4,
    )


@pytest.fixture
def symmetric_hw():
    return make_symmetric_hw()


@pytest.fixture
def symmetric_sig():
    return SignalSpec(p_x=1e-3, beta=1.0, xi=0.0)


@pytest.fixture
def asymmetric_hw():
    gamma = float(np.sqrt(1000.0))
    return HardwareConfig(
        gamma=(gamma, gamma),
        kappa=(
            float(np.sqrt(10.0 ** (-48.0 / 10.0))),
            float(np.sqrt(10.0 ** (-52.0 / 10.0))),
        ),
        rho=(-0.023, -0.027),
        sigma_w2=1e-4,
    )


@pytest.fixture
def asymmetric_sig():
    return SignalSpec(p_x=1e-3, beta=1.3, xi=0.7)
