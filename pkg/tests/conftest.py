from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from rydlat.config import default_config, parse_config_dict
from rydlat.params import TWO_PI, DressingParams

settings.register_profile(
    "rydlat",
    deadline=None,
    max_examples=40,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("rydlat")

MHZ = TWO_PI * 1e6
KHZ = TWO_PI * 1e3


@pytest.fixture(scope="session")
def reference_scenario():
    return parse_config_dict(default_config())


@pytest.fixture(scope="session")
def ref(reference_scenario) -> DressingParams:
    """Reference parameters: omega2c = 2|delta| = 2pi 10 MHz, trapping sign of delta."""
    return reference_scenario.params


@pytest.fixture(scope="session")
def ref_sw(ref):
    return ref.standing_wave()


def scaled_params(omega1=1e-2, omega2c=2.0, delta=1.0, gamma_p=1e-3, gamma_e=1e-4, **kw) -> DressingParams:
    """Parameters in units where |delta| ~ 1; the dynamics only depends on rate ratios."""
    return DressingParams(omega1, omega2c, kw.pop("omega2sw", 0.5), delta, gamma_p, gamma_e, kw.pop("wavelength", 1.0), math.pi, **kw)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
