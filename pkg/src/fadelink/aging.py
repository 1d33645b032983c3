"""Pilot-periodic CSI acquisition and the channel-aging sawtooth.

CSI is measured exactly at pilot instants t = n * T_p and is otherwise
either predicted perfectly (the ``WITH_CP`` scenario) or frozen at the most
recent pilot (the ``AGING`` scenario). Both ends of a link observe the
channel causally: the transmitter sees estimates up to the moment a
transmission starts, the receiver up to the moment it ends.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, normalized_doppler


class Scenario(enum.Enum):
    """CSI acquisition scenario."""

    WITH_CP = "withcp"  # perfect channel prediction: estimates equal truth
    AGING = "aging"  # estimates frozen at the most recent pilot


class Side(enum.Enum):
    """Which end of the link a causal view belongs to."""

    TX = "tx"
    RX = "rx"


def tau_ag(t, pilot_period_s: float):
    """Elapsed time since the most recent pilot: t - floor(t/T_p)*T_p.

    Sawtooth over t with period T_p, range [0, T_p). Pilot instants map to
    exactly 0.0; float rounding of products n*T_p is snapped so the
    zero-at-pilot identity holds bit-exactly. Accepts scalar or array t;
    negative times are rejected.
    """
    if not pilot_period_s > 0.0:
        raise ValueError("pilot_period_s must be > 0")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0.0):
        raise ValueError("tau_ag is undefined for negative t")
    r = np.mod(t_arr, pilot_period_s)
    # Residues within float-rounding distance of 0 or T_p are pilot hits.
    snap = (np.abs(t_arr) + pilot_period_s) * 1e-12
    r = np.where((r <= snap) | (pilot_period_s - r <= snap), 0.0, r)
    return float(r) if t_arr.ndim == 0 else r


@dataclass(frozen=True)
class AgingSchedule:
    """Pilot timing and scenario bound to one channel realization.

    Pilot instants are anchored at t = 0 of the realization grid.
    """

    pilot_period_s: float
    scenario: Scenario
    realization: ChannelRealization

    def __post_init__(self) -> None:
        if not self.pilot_period_s > 0.0:
            raise ValueError("pilot_period_s must be > 0")


def csi_estimate(schedule: AgingSchedule, t):
    """CSI estimate at time t under the schedule's scenario.

    WITH_CP returns the true gain H(t); AGING returns H(t - tau_ag(t)), the
    gain frozen at the most recent pilot. Nearest-grid-point lookup in both
    cases. Accepts scalar or array t; raises for t outside the realization.
    """
    if schedule.scenario is Scenario.WITH_CP:
        return schedule.realization.gain_at(t)
    t_arr = np.asarray(t, dtype=float)
    query = t_arr - tau_ag(t_arr, schedule.pilot_period_s)
    return schedule.realization.gain_at(query if t_arr.ndim else float(query))


def timeline(t_beg: float, t_end: float, k_count: int) -> np.ndarray:
    """K uniformly spaced instants with T[0] = t_beg and T[K-1] = t_end."""
    if k_count < 2:
        raise ValueError(f"timeline requires at least 2 instants, got {k_count}")
    if not t_end > t_beg:
        raise ValueError("t_end must exceed t_beg")
    return np.linspace(t_beg, t_end, k_count)


def tau_attn(
    k: int,
    side: Side,
    t_beg: float,
    t_end: float,
    k_count: int,
    pilot_period_s: float,
    mode: str = "literal",
) -> float:
    """Aging delay attributed to transmission instant k (0-based).

    Rx side: the sawtooth delay at T[k]. Tx side: the delay known at t_beg
    plus a displacement term. ``mode='literal'`` uses tau_ag(t_beg) +
    (t_beg - T[k]), which goes negative for k > 0; ``mode='elapsed'`` uses
    tau_ag(t_beg) + (T[k] - t_beg), which grows with k.
    """
    if not 0 <= k < k_count:
        raise IndexError(f"slot index {k} out of range for {k_count} slots")
    t_k = float(timeline(t_beg, t_end, k_count)[k])
    if side is Side.RX:
        return tau_ag(t_k, pilot_period_s)
    if mode == "literal":
        return tau_ag(t_beg, pilot_period_s) + (t_beg - t_k)
    if mode == "elapsed":
        return tau_ag(t_beg, pilot_period_s) + (t_k - t_beg)
    raise ValueError(f"unknown tau_attn mode {mode!r}")


@dataclass(frozen=True)
class SideInfo:
    """Causal physical-layer side information for one end of the link.

    ``csi_times``/``csi_view`` hold the CSI estimates available up to the
    horizon: t_beg for the Tx view, t_end for the Rx view. ``aging_delays``
    samples the sawtooth on the grid instants inside [t_beg, t_end].
    """

    snr_db: float
    csi_times: np.ndarray
    csi_view: np.ndarray
    norm_doppler: float
    aging_delays: np.ndarray
    side: Side
    t_beg: float
    t_end: float

    def __post_init__(self) -> None:
        if not self.t_end > self.t_beg:
            raise ValueError("t_end must exceed t_beg")
        horizon = self.t_beg if self.side is Side.TX else self.t_end
        if self.csi_times.size and float(np.max(self.csi_times)) > horizon:
            raise ValueError("csi_view extends beyond the causal horizon")
        for name in ("csi_times", "csi_view", "aging_delays"):
            arr = getattr(self, name)
            arr = np.asarray(arr)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


def side_info(
    schedule: AgingSchedule,
    snr_db: float,
    t_beg: float,
    t_end: float,
    side: Side,
) -> SideInfo:
    """Assemble the causal side-information bundle for one end of the link."""
    real = schedule.realization
    if not t_end > t_beg:
        raise ValueError("t_end must exceed t_beg")
    if t_beg < real.start_time_s or t_end > real.end_time_s:
        raise ValueError(
            f"window [{t_beg}, {t_end}] outside realization span "
            f"[{real.start_time_s}, {real.end_time_s}]"
        )
    horizon = t_beg if side is Side.TX else t_end
    times = real.times
    visible = times[times <= horizon]
    estimates = csi_estimate(schedule, visible) if visible.size else np.array([], complex)
    window = times[(times >= t_beg) & (times <= t_end)]
    return SideInfo(
        snr_db=snr_db,
        csi_times=visible.copy(),
        csi_view=np.asarray(estimates, dtype=np.complex128),
        norm_doppler=normalized_doppler(real.config),
        aging_delays=tau_ag(window, schedule.pilot_period_s),
        side=side,
        t_beg=t_beg,
        t_end=t_end,
    )


def csi_nmse(estimate, ground_truth) -> float:
    """Normalized mean square error ||est - truth||^2 / ||truth||^2."""
    est = np.asarray(estimate, dtype=np.complex128)
    truth = np.asarray(ground_truth, dtype=np.complex128)
    if est.shape != truth.shape:
        raise ValueError(
            f"length mismatch: estimate {est.shape} vs ground truth {truth.shape}"
        )
    denom = float(np.sum(np.abs(truth) ** 2))
    if denom == 0.0:
        raise ValueError("ground truth is identically zero")
    return float(np.sum(np.abs(est - truth) ** 2) / denom)
