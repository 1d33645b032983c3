import math

import numpy as np
import pytest

import fadelink as fl

from conftest import make_realization


def test_single_path_amplitude_normalizes_to_one():
    cfg = fl.ChannelConfig(carrier_hz=2.4e9, velocity_mps=3.0, path_count=1, seed=5)
    (path,) = fl.synthesize_paths(cfg)
    assert path.amplitude == pytest.approx(1.0, abs=1e-15)


def test_same_seed_reproduces_paths_bit_exactly():
    cfg = fl.ChannelConfig(carrier_hz=2.4e9, velocity_mps=10.0, seed=99)
    assert fl.synthesize_paths(cfg) == fl.synthesize_paths(cfg)


def test_synthesized_scene_statistics():
    cfg = fl.ChannelConfig(carrier_hz=2.4e9, velocity_mps=10.0, path_count=8, seed=42)
    paths = fl.synthesize_paths(cfg)
    assert len(paths) == 8
    assert sum(p.amplitude**2 for p in paths) == pytest.approx(1.0, abs=1e-12)
    for p in paths:
        assert 0.0 <= p.arrival_angle < 2 * math.pi
        assert 10.0 <= p.distance <= 500.0
        assert p.path_delay == pytest.approx(p.distance / cfg.lightspeed_mps)


def test_path_component_validation():
    with pytest.raises(ValueError):
        fl.PathComponent(amplitude=-0.1, distance=1.0, arrival_angle=0.0, path_delay=0.0)
    with pytest.raises(ValueError):
        fl.PathComponent(amplitude=1.0, distance=1.0, arrival_angle=7.0, path_delay=0.0)


def test_phase_static_when_velocity_zero():
    cfg = fl.ChannelConfig(carrier_hz=2.4e9, velocity_mps=0.0, seed=1)
    path = fl.PathComponent(amplitude=1.0, distance=50.0, arrival_angle=1.0, path_delay=0.0)
    static = 2 * math.pi * cfg.carrier_hz * path.distance / cfg.lightspeed_mps
    for t in (0.0, 0.5, 3.0):
        assert fl.phase_at(path, t, cfg) == pytest.approx(static)


def test_phase_broadside_path_is_time_invariant():
    cfg = fl.ChannelConfig(carrier_hz=2.4e9, velocity_mps=30.0, seed=1)
    path = fl.PathComponent(
        amplitude=1.0, distance=50.0, arrival_angle=math.pi / 2, path_delay=0.0
    )
    assert fl.phase_at(path, 0.0, cfg) == pytest.approx(fl.phase_at(path, 2.0, cfg))


def test_phase_direct_arithmetic():
    # f_c = c and d = 1 m make the static term 2*pi; with v*t*cos(0) = 1 m
    # the Doppler term adds another 2*pi, and it scales linearly in v.
    path = fl.PathComponent(amplitude=1.0, distance=1.0, arrival_angle=0.0, path_delay=0.0)
    cfg1 = fl.ChannelConfig(
        carrier_hz=3e8, velocity_mps=1.0, lightspeed_mps=3e8, path_count=1, seed=0
    )
    assert fl.phase_at(path, 1.0, cfg1) == pytest.approx(4 * math.pi)
    cfg3 = fl.ChannelConfig(
        carrier_hz=3e8, velocity_mps=3.0, lightspeed_mps=3e8, path_count=1, seed=0
    )
    assert fl.phase_at(path, 1.0, cfg3) == pytest.approx(8 * math.pi)


def test_static_single_path_gives_unit_magnitude():
    cfg = fl.ChannelConfig(carrier_hz=2.4e9, velocity_mps=0.0, path_count=1, seed=3)
    real = fl.realize_channel(fl.synthesize_paths(cfg), cfg, duration_s=0.01)
    assert np.allclose(np.abs(real.samples), 1.0)


def test_static_scene_is_time_invariant():
    cfg = fl.ChannelConfig(carrier_hz=2.4e9, velocity_mps=0.0, path_count=8, seed=3)
    real = fl.realize_channel(fl.synthesize_paths(cfg), cfg, duration_s=0.01)
    assert np.all(real.samples == real.samples[0])


def test_realization_power_normalized_on_reference_grid():
    # 4 s at the 3.125e-2 ms simulation step.
    real = make_realization(velocity_mps=15.0, seed=7, duration_s=4.0)
    assert float(np.mean(np.abs(real.samples) ** 2)) == pytest.approx(1.0, rel=1e-2)
    assert len(real) == 128001


def test_realize_rejects_duration_below_one_step():
    cfg = fl.ChannelConfig(carrier_hz=2.4e9, velocity_mps=1.0, seed=0)
    paths = fl.synthesize_paths(cfg)
    with pytest.raises(ValueError, match="shorter than one time step"):
        fl.realize_channel(paths, cfg, duration_s=1e-6, time_step_s=3.125e-5)


def test_gain_lookup_outside_span_rejected():
    real = make_realization(duration_s=0.01)
    with pytest.raises(ValueError, match="outside realization span"):
        real.gain_at(0.02)
    with pytest.raises(ValueError, match="outside realization span"):
        real.gain_at(-0.001)


@pytest.mark.parametrize(
    "carrier,velocity,c,expected",
    [(3e8, 3.0, 3e8, 3.0), (2.4e9, 0.0, 3e8, 0.0), (2.4e9, 15.0, 3e8, 120.0)],
)
def test_normalized_doppler(carrier, velocity, c, expected):
    cfg = fl.ChannelConfig(carrier_hz=carrier, velocity_mps=velocity, lightspeed_mps=c)
    assert fl.normalized_doppler(cfg) == pytest.approx(expected)


def test_apply_channel_noiseless_is_exact(rng):
    x = rng.standard_normal(100) + 1j * rng.standard_normal(100)
    h = rng.standard_normal(100) + 1j * rng.standard_normal(100)
    y = fl.apply_channel(x, h, fl.NoiseSpec(snr_db=math.inf))
    assert np.array_equal(y, h * x)


def test_apply_channel_identity(rng):
    x = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    y = fl.apply_channel(x, np.ones(64), fl.NoiseSpec(snr_db=math.inf))
    assert np.array_equal(y, x)


def test_apply_channel_rejects_length_mismatch(rng):
    with pytest.raises(ValueError, match="length mismatch"):
        fl.apply_channel(np.ones(4), np.ones(5), fl.NoiseSpec(snr_db=10.0), rng)


def test_noise_power_calibration_at_10_db(rng):
    # sigma_n^2 = E_s * 10^(-1) = 0.1; estimate over 1e6 symbols.
    n = 1_000_000
    x = np.exp(1j * rng.uniform(0, 2 * np.pi, n))
    y = fl.apply_channel(x, np.ones(n), fl.NoiseSpec(snr_db=10.0, symbol_power=1.0), rng)
    noise_power = float(np.mean(np.abs(y - x) ** 2))
    assert noise_power == pytest.approx(0.1, rel=0.01)


def test_noise_draws_deterministic_for_fixed_seed():
    x = np.ones(1000, dtype=complex)
    spec = fl.NoiseSpec(snr_db=0.0)
    y1 = fl.apply_channel(x, x, spec, np.random.default_rng(7))
    y2 = fl.apply_channel(x, x, spec, np.random.default_rng(7))
    assert np.array_equal(y1, y2)


def test_noise_spec_rejects_bad_values():
    with pytest.raises(ValueError):
        fl.NoiseSpec(snr_db=0.0, symbol_power=0.0)
    with pytest.raises(ValueError):
        fl.NoiseSpec(snr_db=-math.inf)
    with pytest.raises(ValueError):
        fl.NoiseSpec(snr_db=math.nan)


def test_preset_noiseless_passes_symbols_through(rng):
    pipe = fl.channel_preset("noiseless", duration_s=0.01)
    x = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    h = pipe.realization.gain_at(np.zeros(32))
    assert np.array_equal(fl.apply_channel(x, h, pipe.noise), x)
    assert pipe.noise.is_noiseless


def test_preset_awgn_0db_unit_noise_variance():
    pipe = fl.channel_preset("awgn", snr_db=0.0, duration_s=0.01)
    assert pipe.noise.noise_variance == pytest.approx(1.0)
    assert np.all(pipe.realization.samples == 1.0)


def test_preset_dynamic_v0_is_constant_gain():
    cfg = fl.ChannelConfig(carrier_hz=2.4e9, velocity_mps=0.0, seed=11)
    pipe = fl.channel_preset("dynamic", snr_db=5.0, config=cfg, duration_s=0.01)
    assert np.all(pipe.realization.samples == pipe.realization.samples[0])
    assert abs(pipe.realization.samples[0]) == pytest.approx(1.0)


def test_preset_unknown_kind_rejected():
    with pytest.raises(ValueError, match="unknown channel preset"):
        fl.channel_preset("rician", duration_s=0.01)


def test_realizations_reproducible_bit_exactly():
    a = make_realization(seed=123, duration_s=0.05)
    b = make_realization(seed=123, duration_s=0.05)
    assert np.array_equal(a.samples, b.samples)


def test_faded_symbols_keep_unit_power(rng):
    # E[|HX|^2] should match E[|X|^2] within 3% for unit-power X.
    real = make_realization(velocity_mps=15.0, seed=21, duration_s=4.0)
    n = 120_000
    x = np.exp(1j * rng.uniform(0, 2 * np.pi, n))
    h = real.samples[:n]
    ratio = float(np.mean(np.abs(h * x) ** 2) / np.mean(np.abs(x) ** 2))
    assert ratio == pytest.approx(1.0, rel=0.03)


def test_autocorrelation_decays_faster_at_higher_velocity():
    # |rho(2 ms)| averaged over 100 scenes per velocity must not increase
    # along the velocity grid.
    lag_steps = 64  # 2 ms at the default step
    mean_rho = []
    for velocity in (2.0, 6.0, 10.0, 15.0, 21.0):
        acc = []
        for trial in range(100):
            real = make_realization(
                velocity_mps=velocity, seed=1000 + trial, duration_s=0.25
            )
            h = real.samples
            num = np.vdot(h[:-lag_steps], h[lag_steps:])
            den = np.vdot(h[:-lag_steps], h[:-lag_steps])
            acc.append(abs(num / den))
        mean_rho.append(np.mean(acc))
    assert all(b <= a + 1e-9 for a, b in zip(mean_rho, mean_rho[1:]))
