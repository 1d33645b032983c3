import numpy as np
import pytest

import fadelink as fl


def make_realization(
    velocity_mps=15.0,
    seed=42,
    duration_s=0.5,
    carrier_hz=2.4e9,
    path_count=8,
    time_step_s=fl.DEFAULT_TIME_STEP_S,
):
    cfg = fl.ChannelConfig(
        carrier_hz=carrier_hz,
        velocity_mps=velocity_mps,
        path_count=path_count,
        seed=seed,
    )
    paths = fl.synthesize_paths(cfg)
    return fl.realize_channel(paths, cfg, duration_s, time_step_s)


def make_schedule(scenario, pilot_period_s=4e-3, **kwargs):
    return fl.AgingSchedule(
        pilot_period_s=pilot_period_s,
        scenario=scenario,
        realization=make_realization(**kwargs),
    )


def unit_gain_schedule(scenario=fl.Scenario.WITH_CP, n_samples=4001, pilot_period_s=4e-3):
    """Schedule over an H = 1 channel (identity gain everywhere)."""
    pipe = fl.channel_preset(
        "noiseless", duration_s=(n_samples - 1) * fl.DEFAULT_TIME_STEP_S
    )
    return fl.AgingSchedule(
        pilot_period_s=pilot_period_s, scenario=scenario, realization=pipe.realization
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240615)


@pytest.fixture(scope="session")
def terrain_image():
    return fl.read_image(fl.bundled_image_paths()[0])


@pytest.fixture(scope="session")
def encoded_terrain(terrain_image):
    """(image, block, meta) at the default CR = 1/6 codec settings."""
    block, meta = fl.encode(terrain_image, fl.CodecConfig(16, 128))
    return terrain_image, block, meta
