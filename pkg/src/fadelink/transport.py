"""Feature-block transport: modulation, equalized transmission, permutation.

An L x C real feature block travels as K = C/2 complex "slots": slot k
carries the L symbols formed from feature-channel k (real part) and k+K
(imaginary part), all transmitted inside one time unit under a single CSI
value. Slot quality varies over the transmission window, so a score-driven
permutation can steer important feature-channels into good slots; the
receiver inverts the permutation using only transmitter-causal information.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import j0

from .aging import AgingSchedule, Scenario, Side, SideInfo, csi_estimate, tau_ag, timeline
from .channel import NoiseSpec, complex_noise

# ZF equalization divides by the CSI estimate; estimates below this floor
# raise instead of silently amplifying garbage.
ZF_GAIN_FLOOR = 1e-9


class ZeroForcingError(ValueError):
    """A CSI estimate magnitude fell below the equalization floor."""


@dataclass(frozen=True)
class FeatureBlock:
    """L x C real-valued matrix of tokens by feature-channels (C even)."""

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError("feature block must be a 2-D (tokens x channels) matrix")
        if values.shape[1] % 2 != 0:
            raise ValueError(
                f"channel count must be even for real/imag pairing, got {values.shape[1]}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("feature block contains non-finite values")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def token_count(self) -> int:
        return self.values.shape[0]

    @property
    def channel_count(self) -> int:
        return self.values.shape[1]

    @property
    def slot_count(self) -> int:
        return self.values.shape[1] // 2


@dataclass(frozen=True)
class SymbolFrame:
    """K sequences of L complex symbols, one per time unit, with unit times."""

    units: np.ndarray
    unit_times: np.ndarray

    def __post_init__(self) -> None:
        units = np.asarray(self.units, dtype=np.complex128)
        times = np.asarray(self.unit_times, dtype=np.float64)
        if units.ndim != 2:
            raise ValueError("units must be a 2-D (slots x tokens) matrix")
        if times.shape != (units.shape[0],):
            raise ValueError("unit_times must hold one instant per slot")
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("unit_times must be strictly increasing")
        units = units.copy()
        units.flags.writeable = False
        times = times.copy()
        times.flags.writeable = False
        object.__setattr__(self, "units", units)
        object.__setattr__(self, "unit_times", times)

    @property
    def slot_count(self) -> int:
        return self.units.shape[0]

    @property
    def token_count(self) -> int:
        return self.units.shape[1]


def unit_times(t_beg: float, t_end: float, k_count: int) -> np.ndarray:
    """Transmission instant of each slot; a single slot goes out at t_beg."""
    if k_count == 1:
        if not t_end > t_beg:
            raise ValueError("t_end must exceed t_beg")
        return np.array([t_beg])
    return timeline(t_beg, t_end, k_count)


def modulate(block: FeatureBlock, t_beg: float, t_end: float) -> SymbolFrame:
    """Pair feature-channels k and k+K into the K complex slots.

    Channel-major ordering: slot k carries all L tokens of complex channel
    k and occupies one time unit, so a slot sees exactly one CSI value.
    """
    k_count = block.slot_count
    values = block.values
    units = values[:, :k_count].T + 1j * values[:, k_count:].T
    return SymbolFrame(units=units, unit_times=unit_times(t_beg, t_end, k_count))


def demodulate(frame: SymbolFrame) -> FeatureBlock:
    """Exact inverse of :func:`modulate` (pure reshuffling, no arithmetic)."""
    return FeatureBlock(
        values=np.hstack([frame.units.T.real, frame.units.T.imag])
    )


def transmit(
    frame: SymbolFrame,
    schedule: AgingSchedule,
    noise: NoiseSpec,
    rng: np.random.Generator | None = None,
) -> SymbolFrame:
    """Send a frame through the faded channel and ZF-equalize per slot.

    Every symbol s of slot k becomes (H(T[k]) * s + N) / Hhat(T[k]), where
    Hhat follows the schedule's scenario. CSI is held constant within a
    slot. Raises :class:`ZeroForcingError` when an estimate magnitude falls
    below ``ZF_GAIN_FLOOR``.
    """
    t = frame.unit_times
    h_true = schedule.realization.gain_at(t)
    h_est = np.asarray(csi_estimate(schedule, t), dtype=np.complex128)
    bad = np.abs(h_est) < ZF_GAIN_FLOOR
    if np.any(bad):
        k = int(np.argmax(bad))
        raise ZeroForcingError(
            f"CSI estimate magnitude {abs(h_est[k]):.3e} below floor "
            f"{ZF_GAIN_FLOOR:g} in unit {k} (t = {t[k]:.6g} s)"
        )
    received = h_true[:, None] * frame.units
    if not noise.is_noiseless:
        if rng is None:
            raise ValueError("an RNG is required when the channel is noisy")
        received = received + complex_noise(
            frame.units.shape, noise.noise_variance, rng
        )
    return SymbolFrame(units=received / h_est[:, None], unit_times=t)


def perturb(
    block: FeatureBlock,
    schedule: AgingSchedule,
    noise: NoiseSpec,
    t_beg: float,
    t_end: float,
    rng: np.random.Generator | None = None,
) -> FeatureBlock:
    """The end-to-end channel perturbation: demodulate(transmit(modulate(.)))."""
    return demodulate(transmit(modulate(block, t_beg, t_end), schedule, noise, rng))


def tau_permu(
    k: int,
    t_beg: float,
    t_end: float,
    k_count: int,
    pilot_period_s: float,
    scenario: Scenario = Scenario.AGING,
) -> float:
    """Aging delay experienced by slot k during equalization (0-based k).

    Under WITH_CP the equalizer always holds fresh CSI, so the delay is 0.
    """
    if not 0 <= k < k_count:
        raise IndexError(f"slot index {k} out of range for {k_count} slots")
    if scenario is Scenario.WITH_CP:
        return 0.0
    t_k = float(unit_times(t_beg, t_end, k_count)[k])
    return tau_ag(t_k, pilot_period_s)


@dataclass(frozen=True)
class SlotScore:
    """Per-slot channel-quality scores in (0, 1); smaller means better."""

    scores: np.ndarray

    def __post_init__(self) -> None:
        scores = np.asarray(self.scores, dtype=np.float64)
        if scores.ndim != 1 or scores.size < 1:
            raise ValueError("scores must be a non-empty 1-D vector")
        if np.any(scores <= 0.0) or np.any(scores >= 1.0):
            raise ValueError("scores must lie strictly inside (0, 1)")
        scores = scores.copy()
        scores.flags.writeable = False
        object.__setattr__(self, "scores", scores)

    @property
    def slot_count(self) -> int:
        return self.scores.size


def score_slots(
    info: SideInfo,
    schedule: AgingSchedule,
    k_count: int,
    *,
    noise_weight: float = 1.0,
    aging_weight: float = 1.0,
) -> SlotScore:
    """Predict per-slot impairment from transmitter-causal information.

    Two additive penalties, squashed by tanh into (0, 1):

    * ZF noise amplification ``sigma_n^2 / |Href|^2``, with Href the true
      gain at the slot instant under WITH_CP (prediction supplies it) and
      the estimate frozen at t_beg under AGING (nothing fresher is causal);
    * expected CSI drift ``2 * (1 - J0(2*pi*f_D*tau))`` with tau the slot's
      equalization aging delay, the closed-form mismatch energy of an
      isotropic-scattering channel.

    Both ends of the link can evaluate this identically, which is what lets
    the receiver rebuild the permutation without extra signalling.
    """
    if info.side is not Side.TX:
        raise ValueError("slot scores must be computed from the Tx-side view")
    t = unit_times(info.t_beg, info.t_end, k_count)
    scenario = schedule.scenario
    if scenario is Scenario.WITH_CP:
        h_ref = np.asarray(schedule.realization.gain_at(t), dtype=np.complex128)
        tau = np.zeros(k_count)
    else:
        h_ref = np.full(k_count, csi_estimate(schedule, float(t[0])))
        tau = tau_ag(t, schedule.pilot_period_s)
    bad = np.abs(h_ref) < ZF_GAIN_FLOOR
    if np.any(bad):
        k = int(np.argmax(bad))
        raise ZeroForcingError(
            f"reference CSI magnitude below floor {ZF_GAIN_FLOOR:g} in unit {k}"
        )
    sigma2 = NoiseSpec(snr_db=info.snr_db).noise_variance
    f_d = schedule.realization.config.max_doppler_hz
    drift = 2.0 * (1.0 - j0(2.0 * math.pi * f_d * tau))
    raw = noise_weight * sigma2 / np.abs(h_ref) ** 2 + aging_weight * drift
    # float tanh leaves (0, 1) at both ends: tanh(0) = 0, and tanh saturates
    # to exactly 1.0 for arguments above ~19 (deeply faded pilots). Pin to
    # the nearest representable interior values; ordering is unaffected.
    squashed = np.tanh(np.maximum(raw, np.finfo(float).tiny))
    return SlotScore(scores=np.minimum(squashed, np.nextafter(1.0, 0.0)))


@dataclass(frozen=True)
class PermutationRule:
    """Bijection over the K complex slots and its induced channel action.

    ``slot_map[k]`` is the complex feature-channel pair carried by slot k;
    the induced action on the C = 2K real channels moves channels j and
    j + K together.
    """

    slot_map: np.ndarray
    inverse: np.ndarray | None = None  # derived from slot_map, never passed

    def __post_init__(self) -> None:
        slot_map = np.asarray(self.slot_map, dtype=np.intp)
        k_count = slot_map.size
        if slot_map.ndim != 1 or k_count < 1:
            raise ValueError("slot_map must be a non-empty 1-D index vector")
        if not np.array_equal(np.sort(slot_map), np.arange(k_count)):
            raise ValueError("slot_map must be a bijection over 0..K-1")
        inverse = np.empty(k_count, dtype=np.intp)
        inverse[slot_map] = np.arange(k_count)
        slot_map = slot_map.copy()
        slot_map.flags.writeable = False
        inverse.flags.writeable = False
        object.__setattr__(self, "slot_map", slot_map)
        object.__setattr__(self, "inverse", inverse)

    @property
    def slot_count(self) -> int:
        return self.slot_map.size

    @classmethod
    def identity(cls, k_count: int) -> "PermutationRule":
        return cls(slot_map=np.arange(k_count))


def build_permutation(importance_order, scores: SlotScore) -> PermutationRule:
    """Assign the i-th most important channel pair to the i-th best slot.

    ``importance_order`` lists complex-channel indices, most important
    first. Slots are ranked by ascending score with stable index
    tie-breaking, so equal scores leave an identity-ordered assignment.
    """
    importance = np.asarray(importance_order, dtype=np.intp)
    k_count = scores.slot_count
    if importance.shape != (k_count,) or not np.array_equal(
        np.sort(importance), np.arange(k_count)
    ):
        raise ValueError("importance_order must be a permutation of 0..K-1")
    slots_best_first = np.argsort(scores.scores, kind="stable")
    slot_map = np.empty(k_count, dtype=np.intp)
    slot_map[slots_best_first] = importance
    return PermutationRule(slot_map=slot_map)


def permute(block: FeatureBlock, rule: PermutationRule) -> FeatureBlock:
    """Reorder channel pairs so slot k will carry pair rule.slot_map[k]."""
    k_count = block.slot_count
    if rule.slot_count != k_count:
        raise ValueError(
            f"rule covers {rule.slot_count} slots but block has {k_count}"
        )
    cols = np.concatenate([rule.slot_map, rule.slot_map + k_count])
    return FeatureBlock(values=block.values[:, cols])


def inverse_permute(block: FeatureBlock, rule: PermutationRule) -> FeatureBlock:
    """Exact inverse of :func:`permute` under the same rule."""
    k_count = block.slot_count
    if rule.slot_count != k_count:
        raise ValueError(
            f"rule covers {rule.slot_count} slots but block has {k_count}"
        )
    cols = np.concatenate([rule.inverse, rule.inverse + k_count])
    return FeatureBlock(values=block.values[:, cols])


def impairment(
    sent: FeatureBlock, received: FeatureBlock, squash: bool = True
) -> np.ndarray:
    """Per-slot transmission impairment between sent and received blocks.

    For slot k the raw value is the squared error summed over the L tokens
    of both paired channels (k and k+K). ``squash=True`` maps it through
    tanh into [0, 1); ``squash=False`` returns the raw sums, which carry
    the same ranking without tanh's float saturation at large errors.
    """
    if sent.values.shape != received.values.shape:
        raise ValueError(
            f"shape mismatch: sent {sent.values.shape} vs received "
            f"{received.values.shape}"
        )
    k_count = sent.slot_count
    delta = sent.values - received.values
    per_channel = np.sum(delta**2, axis=0)
    raw = per_channel[:k_count] + per_channel[k_count:]
    return np.tanh(raw) if squash else raw
