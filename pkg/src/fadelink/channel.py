"""Narrowband time-selective fading channel synthesis and application.

The channel is a sum of discrete propagation paths, each contributing a
phasor whose phase rotates with transceiver motion (Doppler). Path delays
are small against the symbol duration, so the channel is flat: a single
complex gain H(t) multiplies each symbol, plus additive complex Gaussian
noise. Realizations are sampled on a uniform time grid and power-normalized
so the empirical mean of |H|^2 equals one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LIGHTSPEED_MPS = 2.99792458e8

# Default simulation time unit: 3.125e-2 ms.
DEFAULT_TIME_STEP_S = 3.125e-5

# Scene geometry for synthesized paths: propagation distances drawn
# uniformly from this range (metres).
PATH_DISTANCE_RANGE_M = (10.0, 500.0)

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PathComponent:
    """One multipath component of the narrowband channel.

    amplitude      unitless gain, >= 0
    distance       propagation distance in metres (sets the static phase)
    arrival_angle  angle in radians relative to the motion vector, in [0, 2*pi)
    path_delay     propagation delay in seconds; kept for completeness but
                   unused in the flat-fading gain (no inter-symbol
                   interference in the narrowband regime)
    """

    amplitude: float
    distance: float
    arrival_angle: float
    path_delay: float

    def __post_init__(self) -> None:
        if not self.amplitude >= 0.0:
            raise ValueError(f"amplitude must be >= 0, got {self.amplitude}")
        if not 0.0 <= self.arrival_angle < _TWO_PI:
            raise ValueError(
                f"arrival_angle must lie in [0, 2*pi), got {self.arrival_angle}"
            )


@dataclass(frozen=True)
class ChannelConfig:
    """Parameters of the fading scene.

    carrier_hz     carrier frequency f_c in Hz
    velocity_mps   transceiver relative speed v in m/s
    path_count     number of multipath components
    doppler_scale  scaling factor applied in the normalized Doppler summary
    lightspeed_mps propagation speed c in m/s
    seed           64-bit seed used when no explicit RNG is supplied
    """

    carrier_hz: float
    velocity_mps: float
    path_count: int = 8
    doppler_scale: float = 1.0
    lightspeed_mps: float = LIGHTSPEED_MPS
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.carrier_hz > 0.0:
            raise ValueError(f"carrier_hz must be > 0, got {self.carrier_hz}")
        if not self.velocity_mps >= 0.0:
            raise ValueError(f"velocity_mps must be >= 0, got {self.velocity_mps}")
        if self.path_count < 1:
            raise ValueError(f"path_count must be >= 1, got {self.path_count}")
        if not self.lightspeed_mps > 0.0:
            raise ValueError("lightspeed_mps must be > 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @property
    def max_doppler_hz(self) -> float:
        """Maximum Doppler shift f_c * v / c in Hz."""
        return self.carrier_hz * self.velocity_mps / self.lightspeed_mps


def normalized_doppler(config: ChannelConfig) -> float:
    """Scalar summary of time-selectivity intensity: scale * f_c * v / c."""
    return config.doppler_scale * config.max_doppler_hz


def synthesize_paths(
    config: ChannelConfig, rng: np.random.Generator | None = None
) -> tuple[PathComponent, ...]:
    """Draw a random multipath scene.

    Amplitudes are Rayleigh-drawn then normalized so the squared amplitudes
    sum to one; arrival angles are uniform on [0, 2*pi); distances uniform
    on ``PATH_DISTANCE_RANGE_M``; delays follow from distance / c. Identical
    (config, seed) inputs reproduce the scene bit-exactly; the draw order
    (amplitudes, angles, distances) is part of that contract.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    n = config.path_count
    amplitudes = rng.rayleigh(1.0, n)
    amplitudes /= math.sqrt(float(np.sum(amplitudes**2)))
    angles = rng.uniform(0.0, _TWO_PI, n)
    distances = rng.uniform(*PATH_DISTANCE_RANGE_M, n)
    return tuple(
        PathComponent(
            amplitude=float(amplitudes[i]),
            distance=float(distances[i]),
            arrival_angle=float(angles[i]),
            path_delay=float(distances[i] / config.lightspeed_mps),
        )
        for i in range(n)
    )


def phase_at(path: PathComponent, t, config: ChannelConfig):
    """Phase of one path at time t (seconds): static offset plus Doppler term.

    ``2*pi*f_c*d/c + 2*pi*f_c*v*t*cos(theta)/c``. Accepts scalar or array t.
    """
    fc = config.carrier_hz
    c = config.lightspeed_mps
    static = _TWO_PI * fc * path.distance / c
    rate = _TWO_PI * fc * config.velocity_mps * math.cos(path.arrival_angle) / c
    return static + rate * np.asarray(t, dtype=float)


@dataclass(frozen=True)
class ChannelRealization:
    """Complex channel gain sampled on a uniform time grid.

    The stored samples are power-normalized: mean |H|^2 over the grid is 1.
    Realizations are immutable after construction and safe to share across
    threads.
    """

    samples: np.ndarray
    time_step_s: float
    start_time_s: float
    paths: tuple[PathComponent, ...]
    config: ChannelConfig

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=np.complex128)
        if samples.ndim != 1 or samples.size < 1:
            raise ValueError("samples must be a non-empty 1-D sequence")
        if not self.time_step_s > 0.0:
            raise ValueError("time_step_s must be > 0")
        mean_power = float(np.mean(np.abs(samples) ** 2))
        if abs(mean_power - 1.0) > 1e-2:
            raise ValueError(
                f"realization is not power-normalized: mean |H|^2 = {mean_power}"
            )
        samples = samples.copy()
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def end_time_s(self) -> float:
        """Time of the last grid sample."""
        return self.start_time_s + (self.samples.size - 1) * self.time_step_s

    @property
    def times(self) -> np.ndarray:
        """The sampling grid in seconds."""
        return self.start_time_s + np.arange(self.samples.size) * self.time_step_s

    def gain_at(self, t):
        """CSI at time t via nearest-grid-point lookup.

        Raises ValueError when t falls outside the realization span (with a
        half-step tolerance at either end). Accepts scalar or array t.
        """
        t_arr = np.asarray(t, dtype=float)
        idx = np.rint((t_arr - self.start_time_s) / self.time_step_s)
        if np.any(idx < 0) or np.any(idx >= self.samples.size):
            bad = t_arr if t_arr.ndim == 0 else t_arr[(idx < 0) | (idx >= len(self))]
            raise ValueError(
                f"time {bad} outside realization span "
                f"[{self.start_time_s}, {self.end_time_s}]"
            )
        gains = self.samples[idx.astype(np.intp)]
        return complex(gains) if t_arr.ndim == 0 else gains


def realize_channel(
    paths: tuple[PathComponent, ...] | list[PathComponent],
    config: ChannelConfig,
    duration_s: float,
    time_step_s: float = DEFAULT_TIME_STEP_S,
) -> ChannelRealization:
    """Sample H(t) = sum_l a_l * exp(-j*phi_l(t)) on a uniform grid.

    The grid covers [0, duration_s] inclusive. After sampling, the gain is
    scaled so the empirical mean of |H|^2 equals one.
    """
    if not duration_s > 0.0 or not time_step_s > 0.0:
        raise ValueError("duration_s and time_step_s must be > 0")
    if duration_s < time_step_s:
        raise ValueError(
            f"duration {duration_s} s is shorter than one time step {time_step_s} s"
        )
    if not paths:
        raise ValueError("at least one path component is required")

    n = int(round(duration_s / time_step_s)) + 1
    t = np.arange(n) * time_step_s

    fc = config.carrier_hz
    c = config.lightspeed_mps
    amps = np.array([p.amplitude for p in paths])
    static = _TWO_PI * fc * np.array([p.distance for p in paths]) / c
    rates = (
        _TWO_PI
        * fc
        * config.velocity_mps
        * np.cos(np.array([p.arrival_angle for p in paths]))
        / c
    )

    phases = static[None, :] + t[:, None] * rates[None, :]
    h = (amps[None, :] * np.exp(-1j * phases)).sum(axis=1)

    mean_power = float(np.mean(np.abs(h) ** 2))
    if mean_power < 1e-30:
        raise ValueError("degenerate realization: paths cancel to zero gain")
    h /= math.sqrt(mean_power)

    return ChannelRealization(
        samples=h,
        time_step_s=time_step_s,
        start_time_s=0.0,
        paths=tuple(paths),
        config=config,
    )


@dataclass(frozen=True)
class NoiseSpec:
    """Additive-noise description tied to the symbol power E_s.

    Noiseless operation is requested with ``snr_db=math.inf`` (the only
    sanctioned sentinel; large finite values are not equivalent).
    """

    snr_db: float
    symbol_power: float = 1.0

    def __post_init__(self) -> None:
        if not self.symbol_power > 0.0:
            raise ValueError("symbol_power must be > 0")
        if math.isnan(self.snr_db) or self.snr_db == -math.inf:
            raise ValueError(f"snr_db must be finite or +inf, got {self.snr_db}")

    @property
    def is_noiseless(self) -> bool:
        return math.isinf(self.snr_db)

    @property
    def noise_variance(self) -> float:
        """Complex noise variance: E_s * 10^(-SNR/10); zero when noiseless."""
        if self.is_noiseless:
            return 0.0
        return self.symbol_power * 10.0 ** (-self.snr_db / 10.0)


def complex_noise(
    shape, variance: float, rng: np.random.Generator
) -> np.ndarray:
    """Circular complex Gaussian samples with the given total variance.

    Each real and imaginary part carries variance/2. A single generator call
    keeps the draw order reproducible across invocations.
    """
    if variance == 0.0:
        return np.zeros(shape, dtype=np.complex128)
    parts = rng.standard_normal(tuple(np.atleast_1d(shape)) + (2,))
    scale = math.sqrt(variance / 2.0)
    return scale * (parts[..., 0] + 1j * parts[..., 1])


def apply_channel(
    x, h, noise: NoiseSpec, rng: np.random.Generator | None = None
) -> np.ndarray:
    """Y[t] = H[t] * X[t] + N[t] with i.i.d. circular Gaussian noise."""
    x_arr = np.asarray(x, dtype=np.complex128)
    h_arr = np.asarray(h, dtype=np.complex128)
    if x_arr.shape != h_arr.shape:
        raise ValueError(
            f"length mismatch: X has shape {x_arr.shape}, H has shape {h_arr.shape}"
        )
    y = h_arr * x_arr
    if noise.is_noiseless:
        return y
    if rng is None:
        raise ValueError("an RNG is required when the channel is noisy")
    return y + complex_noise(x_arr.shape, noise.noise_variance, rng)


def _unit_gain_realization(n_samples: int, time_step_s: float) -> ChannelRealization:
    config = ChannelConfig(carrier_hz=1.0, velocity_mps=0.0, path_count=1, seed=0)
    path = PathComponent(amplitude=1.0, distance=0.0, arrival_angle=0.0, path_delay=0.0)
    return ChannelRealization(
        samples=np.ones(n_samples, dtype=np.complex128),
        time_step_s=time_step_s,
        start_time_s=0.0,
        paths=(path,),
        config=config,
    )


@dataclass(frozen=True)
class ChannelPipeline:
    """A realization paired with its noise description, ready to transmit over."""

    realization: ChannelRealization
    noise: NoiseSpec


def channel_preset(
    kind: str,
    *,
    snr_db: float | None = None,
    symbol_power: float = 1.0,
    config: ChannelConfig | None = None,
    duration_s: float = 4.0,
    time_step_s: float = DEFAULT_TIME_STEP_S,
    rng: np.random.Generator | None = None,
) -> ChannelPipeline:
    """Build one of the three canonical channel conditions.

    ``noiseless``  H = 1 everywhere, no noise (infinite-SNR sentinel)
    ``awgn``       H = 1 everywhere, Gaussian noise at ``snr_db``
    ``dynamic``    full fading realization from ``config`` plus noise
    """
    n = int(round(duration_s / time_step_s)) + 1
    if kind == "noiseless":
        return ChannelPipeline(
            realization=_unit_gain_realization(n, time_step_s),
            noise=NoiseSpec(snr_db=math.inf, symbol_power=symbol_power),
        )
    if kind == "awgn":
        if snr_db is None:
            raise ValueError("awgn preset requires snr_db")
        return ChannelPipeline(
            realization=_unit_gain_realization(n, time_step_s),
            noise=NoiseSpec(snr_db=snr_db, symbol_power=symbol_power),
        )
    if kind == "dynamic":
        if config is None:
            raise ValueError("dynamic preset requires a ChannelConfig")
        if snr_db is None:
            raise ValueError("dynamic preset requires snr_db (use math.inf for none)")
        paths = synthesize_paths(config, rng)
        realization = realize_channel(paths, config, duration_s, time_step_s)
        return ChannelPipeline(
            realization=realization,
            noise=NoiseSpec(snr_db=snr_db, symbol_power=symbol_power),
        )
    raise ValueError(f"unknown channel preset {kind!r}")
