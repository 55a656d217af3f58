"""Shared fixtures: a small, fast victim configuration for unit tests and
the full desk-scale preset for the heavier end-to-end checks."""

import numpy as np
import pytest

from fmcwlab.channel import LinkBudget
from fmcwlab.pipeline import CfarConfig, ClusterConfig
from fmcwlab.waveforms import CONFIG_PRESETS, MHZ_PER_US, RadarConfig


@pytest.fixture(scope="session")
def small_cfg() -> RadarConfig:
    """Tiny waveform (5 MHz sim rate, 32 chirps) so unit tests stay fast.

    d_res = 75 m, v_res ~ 125 m/s: coarse, but the arithmetic is scale-free.
    """
    return RadarConfig(
        f_c=1.5e9, bandwidth=2e6, slope=0.1 * MHZ_PER_US, t_chirp=25e-6,
        n_chirps=32, t_frame=1e-3, f_samp=1e6, sim_rate=5e6,
    )


@pytest.fixture(scope="session")
def small_cfar() -> CfarConfig:
    """CFAR window that fits the small config's 32x32-ish maps."""
    return CfarConfig(train_r=4, train_d=2, guard_r=2, guard_d=1, pfa=1e-6)


@pytest.fixture(scope="session")
def cluster_cfg() -> ClusterConfig:
    return ClusterConfig()


@pytest.fixture(scope="session")
def table4() -> RadarConfig:
    return CONFIG_PRESETS["table4"]


@pytest.fixture(scope="session")
def budget() -> LinkBudget:
    return LinkBudget()


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
