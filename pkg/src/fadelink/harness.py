"""Reproducible experiment harness: NMSE tables, permutation-gain and SNR
sweeps, single-image transmissions, and a fast invariant selftest.

Every experiment is a pure function of (config, seed). Cell seeds are
derived from the base seed and sweep indices, trial seeds are cell_seed XOR
trial_index, and each consumer role (scene, noise, window placement, block
content) gets its own stream, so trials are independent and any emitted row
can be regenerated in isolation from the seed it carries.
"""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .aging import AgingSchedule, Scenario, Side, csi_estimate, csi_nmse, side_info
from .channel import (
    DEFAULT_TIME_STEP_S,
    LIGHTSPEED_MPS,
    ChannelConfig,
    NoiseSpec,
    realize_channel,
    synthesize_paths,
)
from .codec import CodecConfig, bundled_image_paths, decode, encode, read_image, write_ppm
from .metrics import QualityReport, measured_snr, psnr, spearman
from .svg import line_chart
from .transport import (
    FeatureBlock,
    PermutationRule,
    build_permutation,
    demodulate,
    impairment,
    inverse_permute,
    modulate,
    permute,
    score_slots,
    transmit,
)

CSV_SCHEMA_TAG = "# fadelink-csv-v1"

# Role indices for per-trial RNG streams.
ROLE_SCENE = 0
ROLE_NOISE = 1
ROLE_WINDOW = 2
ROLE_BLOCK = 3

# Experiment tags keep cell seeds distinct across experiment kinds.
_TAG_NMSE = 1
_TAG_PERM = 2
_TAG_SWEEP = 3
_TAG_TRANSMIT = 4


def derive_seed(base: int, *indices: int) -> int:
    """Stable 64-bit seed for a sweep cell, from the base seed and indices."""
    ss = np.random.SeedSequence(entropy=[int(base), *[int(i) for i in indices]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def trial_seed(cell_seed: int, trial_index: int) -> int:
    """Documented per-trial stream scheme: cell seed XOR trial index."""
    return int(cell_seed) ^ int(trial_index)


def rng_for(seed: int, role: int) -> np.random.Generator:
    """Independent generator for one consumer role within a trial."""
    return np.random.default_rng(np.random.SeedSequence(entropy=[int(seed), role]))


@dataclass(frozen=True)
class ExperimentConfig:
    """Knobs shared by all harness experiments."""

    velocities: tuple[float, ...] = (2.0, 6.0, 10.0, 15.0, 21.0)
    snr_list_db: tuple[float, ...] = (-6.0, -3.0, 0.0, 3.0, 6.0, 9.0, 12.0, 15.0, 18.0)
    pilot_period_s: float = 4.0e-3
    carrier_hz: float = 2.4e9
    lightspeed_mps: float = LIGHTSPEED_MPS
    doppler_scale: float = 1.0
    path_count: int = 8
    trials: int = 50
    seed: int = 1
    scenario: Scenario = Scenario.AGING
    trajectory_s: float = 4.0
    time_step_s: float = DEFAULT_TIME_STEP_S
    block_edge: int = 16
    kept_coefficients: int = 128
    symbol_power: float = 1.0
    noise_weight: float = 1.0
    aging_weight: float = 1.0
    images: tuple[str, ...] = ()
    out_dir: Path = Path("out")
    svg: bool = False

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.velocities:
            raise ValueError("velocities must be a non-empty list")
        if not self.snr_list_db:
            raise ValueError("snr list must be non-empty")
        object.__setattr__(self, "out_dir", Path(self.out_dir))

    def codec_config(self) -> CodecConfig:
        return CodecConfig(
            block_edge=self.block_edge, kept_coefficients=self.kept_coefficients
        )

    def channel_config(self, velocity_mps: float, seed: int) -> ChannelConfig:
        return ChannelConfig(
            carrier_hz=self.carrier_hz,
            velocity_mps=velocity_mps,
            path_count=self.path_count,
            doppler_scale=self.doppler_scale,
            lightspeed_mps=self.lightspeed_mps,
            seed=seed,
        )

    def parameters_jsonable(self) -> dict:
        """Config echo for JSON summaries; excludes output paths on purpose
        so reruns into different directories stay byte-identical."""
        return {
            "velocities": list(self.velocities),
            "snr_list_db": [_jsonable_float(s) for s in self.snr_list_db],
            "pilot_period_s": self.pilot_period_s,
            "carrier_hz": self.carrier_hz,
            "lightspeed_mps": self.lightspeed_mps,
            "doppler_scale": self.doppler_scale,
            "path_count": self.path_count,
            "trials": self.trials,
            "seed": self.seed,
            "scenario": self.scenario.value,
            "trajectory_s": self.trajectory_s,
            "time_step_s": self.time_step_s,
            "block_edge": self.block_edge,
            "kept_coefficients": self.kept_coefficients,
            "symbol_power": self.symbol_power,
            "noise_weight": self.noise_weight,
            "aging_weight": self.aging_weight,
            "images": [Path(p).name for p in self.images],
        }


@dataclass(frozen=True)
class TrialRecord:
    """One fully reproducible transmission outcome."""

    seed: int
    velocity_mps: float
    snr_db: float
    scenario: Scenario
    permutation: str  # "scored" | "identity"
    report: QualityReport

    def to_jsonable(self) -> dict:
        return {
            "seed": self.seed,
            "velocity_mps": self.velocity_mps,
            "snr_db": _jsonable_float(self.snr_db),
            "scenario": self.scenario.value,
            "permutation": self.permutation,
            "report": self.report.to_jsonable(),
        }


# --- single transmissions ---------------------------------------------------


@dataclass(frozen=True)
class TrialSetup:
    """Channel realization, schedule and window for one trial."""

    schedule: AgingSchedule
    noise: NoiseSpec
    t_beg: float
    t_end: float
    slot_count: int


def realization_for(cfg: ExperimentConfig, velocity_mps: float, seed: int):
    """The trial's channel trajectory; a pure function of (cfg, velocity, seed)."""
    chan = cfg.channel_config(velocity_mps, seed)
    paths = synthesize_paths(chan, rng_for(seed, ROLE_SCENE))
    return realize_channel(paths, chan, cfg.trajectory_s, cfg.time_step_s)


def build_trial(
    cfg: ExperimentConfig,
    velocity_mps: float,
    snr_db: float,
    scenario: Scenario,
    seed: int,
    slot_count: int,
    realization=None,
) -> TrialSetup:
    """Realize a trajectory and draw the transmission window for one trial.

    Passing a precomputed ``realization`` lets paired arms (scenarios or
    permutation modes) share the exact same channel draw.
    """
    if realization is None:
        realization = realization_for(cfg, velocity_mps, seed)
    schedule = AgingSchedule(
        pilot_period_s=cfg.pilot_period_s, scenario=scenario, realization=realization
    )
    window = slot_count * cfg.time_step_s
    latest = realization.end_time_s - window - cfg.time_step_s
    if latest <= 0:
        raise ValueError(
            f"trajectory of {cfg.trajectory_s} s too short for a "
            f"{slot_count}-slot window"
        )
    t_beg = float(rng_for(seed, ROLE_WINDOW).uniform(0.0, latest))
    return TrialSetup(
        schedule=schedule,
        noise=NoiseSpec(snr_db=snr_db, symbol_power=cfg.symbol_power),
        t_beg=t_beg,
        t_end=t_beg + window,
        slot_count=slot_count,
    )


def run_transmission(
    cfg: ExperimentConfig,
    block: FeatureBlock,
    importance,
    setup: TrialSetup,
    seed: int,
    scored: bool,
):
    """Send one block through the pipeline; returns (received block, diagnostics).

    Permutation rules are built from the Tx-side causal view, so the
    receive side reproduces them without extra signalling.
    """
    info = side_info(
        setup.schedule, setup.noise.snr_db, setup.t_beg, setup.t_end, Side.TX
    )
    scores = score_slots(
        info,
        setup.schedule,
        setup.slot_count,
        noise_weight=cfg.noise_weight,
        aging_weight=cfg.aging_weight,
    )
    if scored:
        rule = build_permutation(importance, scores)
    else:
        rule = PermutationRule.identity(setup.slot_count)
    wire = permute(block, rule)
    frame = modulate(wire, setup.t_beg, setup.t_end)
    received_frame = transmit(frame, setup.schedule, setup.noise, rng_for(seed, ROLE_NOISE))
    wire_hat = demodulate(received_frame)
    received = inverse_permute(wire_hat, rule)

    diag = {
        "scores": scores.scores,
        "impairment": impairment(wire, wire_hat),
        "impairment_raw": impairment(wire, wire_hat, squash=False),
        "frame": frame,
        "received_frame": received_frame,
    }
    return received, diag


def _window_nmse(setup: TrialSetup) -> float:
    t = np.linspace(setup.t_beg, setup.t_end, setup.slot_count) \
        if setup.slot_count > 1 else np.array([setup.t_beg])
    truth = setup.schedule.realization.gain_at(t)
    est = csi_estimate(setup.schedule, t)
    return csi_nmse(est, truth)


def _measured_snr_of(setup: TrialSetup, diag: dict) -> float:
    t = diag["frame"].unit_times
    h_true = setup.schedule.realization.gain_at(t)
    h_est = np.asarray(csi_estimate(setup.schedule, t))
    clean = h_true[:, None] * diag["frame"].units
    received = diag["received_frame"].units * h_est[:, None]
    return measured_snr(clean.ravel(), received.ravel())


# --- experiments -------------------------------------------------------------


def run_nmse_table(cfg: ExperimentConfig) -> dict:
    """Mean aging-CSI NMSE per velocity over seeded trials."""
    rows = []
    for vi, velocity in enumerate(cfg.velocities):
        cell = derive_seed(cfg.seed, _TAG_NMSE, vi)
        values = []
        for t in range(cfg.trials):
            seed = trial_seed(cell, t)
            chan = cfg.channel_config(velocity, seed)
            paths = synthesize_paths(chan, rng_for(seed, ROLE_SCENE))
            realization = realize_channel(paths, chan, cfg.trajectory_s, cfg.time_step_s)
            schedule = AgingSchedule(
                pilot_period_s=cfg.pilot_period_s,
                scenario=cfg.scenario,
                realization=realization,
            )
            estimates = csi_estimate(schedule, realization.times)
            values.append(csi_nmse(estimates, realization.samples))
        rows.append(
            {
                "velocity_mps": velocity,
                "mean_nmse": statistics.fmean(values),
                "std_nmse": statistics.pstdev(values),
                "trials": cfg.trials,
                "seed": cell,
            }
        )
    result = {
        "experiment": "nmse-table",
        "parameters": cfg.parameters_jsonable(),
        "rows": rows,
    }
    _emit(cfg, "nmse_table", result, header=list(rows[0].keys()))
    if cfg.svg:
        chart = line_chart(
            [("mean NMSE", [r["velocity_mps"] for r in rows], [r["mean_nmse"] for r in rows])],
            title="Aging-CSI NMSE vs velocity",
            x_label="velocity (m/s)",
            y_label="NMSE",
        )
        _write_text(cfg.out_dir / "nmse_table.svg", chart)
    return result


def _encoded_images(cfg: ExperimentConfig):
    paths = [Path(p) for p in cfg.images] or bundled_image_paths()
    if not paths:
        raise ValueError("no input images available")
    codec_cfg = cfg.codec_config()
    encoded = []
    for p in paths:
        image = read_image(p)
        block, meta = encode(image, codec_cfg)
        encoded.append((p, image, block, meta))
    return encoded


def _paired_permutation_psnrs(
    cfg: ExperimentConfig,
    encoded,
    velocity: float,
    snr_db: float,
    scenario: Scenario,
    seed: int,
) -> tuple[float, float]:
    """(scored, identity) PSNR for one trial; both arms share channel,
    window, and noise draws."""
    _, image, block, meta = encoded[seed % len(encoded)]
    setup = build_trial(cfg, velocity, snr_db, scenario, seed, block.slot_count)
    results = []
    for scored in (True, False):
        received, _ = run_transmission(cfg, block, meta.importance, setup, seed, scored)
        results.append(psnr(image, decode(received, meta)))
    return results[0], results[1]


def run_perm_gain(cfg: ExperimentConfig) -> dict:
    """Paired scored-vs-identity permutation PSNR per (velocity, SNR) cell.

    Both arms of a pair consume identical channel realizations, window
    placements, and noise draws; the difference is the permutation alone.
    """
    encoded = _encoded_images(cfg)
    rows = []
    for vi, velocity in enumerate(cfg.velocities):
        for si, snr_db in enumerate(cfg.snr_list_db):
            cell = derive_seed(cfg.seed, _TAG_PERM, vi, si)
            gains, psnr_scored, psnr_identity = [], [], []
            for t in range(cfg.trials):
                seed = trial_seed(cell, t)
                p_scored, p_identity = _paired_permutation_psnrs(
                    cfg, encoded, velocity, snr_db, cfg.scenario, seed
                )
                psnr_scored.append(p_scored)
                psnr_identity.append(p_identity)
                if math.isinf(p_scored) and math.isinf(p_identity):
                    gains.append(0.0)  # both arms lossless
                else:
                    gains.append(p_scored - p_identity)
            mean_gain = statistics.fmean(gains)
            std_gain = statistics.pstdev(gains)
            ci95 = 1.96 * std_gain / math.sqrt(len(gains))
            rows.append(
                {
                    "velocity_mps": velocity,
                    "snr_db": snr_db,
                    "mean_psnr_scored_db": _dB_mean(psnr_scored),
                    "mean_psnr_identity_db": _dB_mean(psnr_identity),
                    "mean_gain_db": mean_gain,
                    "gain_ci95_lo_db": mean_gain - ci95,
                    "trials": cfg.trials,
                    "seed": cell,
                }
            )
    result = {
        "experiment": "perm-gain",
        "parameters": cfg.parameters_jsonable(),
        "rows": rows,
    }
    _emit(cfg, "perm_gain", result, header=list(rows[0].keys()))
    if cfg.svg:
        series = []
        for velocity in cfg.velocities:
            sub = [r for r in rows if r["velocity_mps"] == velocity]
            series.append(
                (
                    f"v={velocity:g} m/s",
                    [r["snr_db"] for r in sub],
                    [r["mean_gain_db"] for r in sub],
                )
            )
        chart = line_chart(
            series,
            title="Permutation gain vs SNR",
            x_label="SNR (dB)",
            y_label="PSNR gain (dB)",
        )
        _write_text(cfg.out_dir / "perm_gain.svg", chart)
    return result


def run_snr_sweep(cfg: ExperimentConfig) -> dict:
    """Mean PSNR per SNR point, per scenario, with scored permutation.

    Scenarios are paired: at a given (velocity, SNR, trial) both scenarios
    see the same realization, window, and noise sequence.
    """
    encoded = _encoded_images(cfg)
    rows = []
    for vi, velocity in enumerate(cfg.velocities):
        for si, snr_db in enumerate(cfg.snr_list_db):
            cell = derive_seed(cfg.seed, _TAG_SWEEP, vi, si)
            per_scenario = {Scenario.WITH_CP: [], Scenario.AGING: []}
            for t in range(cfg.trials):
                seed = trial_seed(cell, t)
                _, image, block, meta = encoded[seed % len(encoded)]
                realization = realization_for(cfg, velocity, seed)
                for scenario in per_scenario:
                    setup = build_trial(
                        cfg,
                        velocity,
                        snr_db,
                        scenario,
                        seed,
                        block.slot_count,
                        realization=realization,
                    )
                    received, _ = run_transmission(
                        cfg, block, meta.importance, setup, seed, scored=True
                    )
                    per_scenario[scenario].append(psnr(image, decode(received, meta)))
            for scenario, values in per_scenario.items():
                rows.append(
                    {
                        "scenario": scenario.value,
                        "velocity_mps": velocity,
                        "snr_db": snr_db,
                        "mean_psnr_db": _dB_mean(values),
                        "std_psnr_db": _dB_std(values),
                        "trials": cfg.trials,
                        "seed": cell,
                    }
                )
    result = {
        "experiment": "snr-sweep",
        "parameters": cfg.parameters_jsonable(),
        "rows": rows,
    }
    _emit(cfg, "snr_sweep", result, header=list(rows[0].keys()))
    if cfg.svg:
        series = []
        for scenario in ("withcp", "aging"):
            for velocity in cfg.velocities:
                sub = [
                    r
                    for r in rows
                    if r["scenario"] == scenario and r["velocity_mps"] == velocity
                ]
                finite = [
                    (r["snr_db"], r["mean_psnr_db"])
                    for r in sub
                    if not isinstance(r["mean_psnr_db"], str)
                ]
                if finite:
                    series.append(
                        (
                            f"{scenario} v={velocity:g}",
                            [x for x, _ in finite],
                            [y for _, y in finite],
                        )
                    )
        chart = line_chart(
            series,
            title="PSNR vs SNR",
            x_label="SNR (dB)",
            y_label="PSNR (dB)",
        )
        _write_text(cfg.out_dir / "snr_sweep.svg", chart)
    return result


def run_transmit(cfg: ExperimentConfig, image_path=None) -> TrialRecord:
    """Run the full pipeline once and write the reconstruction plus report.

    Uses the first velocity and SNR of the configured lists.
    """
    if image_path is None:
        if cfg.images:
            image_path = cfg.images[0]
        else:
            image_path = bundled_image_paths()[0]
    image = read_image(image_path)
    block, meta = encode(image, cfg.codec_config())

    velocity = cfg.velocities[0]
    snr_db = cfg.snr_list_db[0]
    cell = derive_seed(cfg.seed, _TAG_TRANSMIT, 0)
    seed = trial_seed(cell, 0)
    setup = build_trial(cfg, velocity, snr_db, cfg.scenario, seed, block.slot_count)
    received, diag = run_transmission(
        cfg, block, meta.importance, setup, seed, scored=True
    )
    reconstructed = decode(received, meta)

    err = float(np.mean((image.astype(float) - reconstructed.astype(float)) ** 2))
    report = QualityReport(
        mse=err,
        psnr_db=psnr(image, reconstructed),
        nmse=_window_nmse(setup),
        snr_measured_db=_measured_snr_of(setup, diag),
        per_slot_impairment=tuple(float(v) for v in diag["impairment"]),
        score_impairment_spearman=spearman(diag["scores"], diag["impairment_raw"]),
    )
    record = TrialRecord(
        seed=seed,
        velocity_mps=velocity,
        snr_db=snr_db,
        scenario=cfg.scenario,
        permutation="scored",
        report=report,
    )
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    write_ppm(cfg.out_dir / "reconstructed.ppm", reconstructed)
    payload = {
        "experiment": "transmit",
        "parameters": cfg.parameters_jsonable(),
        "image": Path(image_path).name,
        "record": record.to_jsonable(),
    }
    _write_text(cfg.out_dir / "transmit.json", _json_dumps(payload))
    return record


# --- selftest ----------------------------------------------------------------


def selftest(cfg: ExperimentConfig | None = None, echo=print) -> bool:
    """Fast invariant battery; returns True when every check passes."""
    import tempfile

    from .aging import tau_ag
    from .channel import apply_channel

    cfg = cfg or ExperimentConfig()
    ok = True

    def check(name: str, passed: bool) -> None:
        nonlocal ok
        echo(f"selftest: {name}: {'ok' if passed else 'FAIL'}")
        ok = ok and passed

    rng = np.random.default_rng(cfg.seed)

    t = rng.uniform(0.0, 1.0, 20000)
    period = 4.0e-3
    r = tau_ag(t, period)
    pilots = tau_ag(np.arange(1, 2001) * period, period)
    check(
        "sawtooth range and pilot zeros",
        bool(np.all(r >= 0.0) and np.all(r < period) and np.all(pilots == 0.0)),
    )

    round_trip = True
    for _ in range(100):
        tokens = int(rng.integers(1, 12))
        slots = int(rng.integers(1, 16))
        block = FeatureBlock(rng.standard_normal((tokens, 2 * slots)))
        again = demodulate(modulate(block, 0.0, 1.0))
        rule = PermutationRule(rng.permutation(slots))
        back = inverse_permute(permute(block, rule), rule)
        round_trip = (
            round_trip
            and np.array_equal(block.values, again.values)
            and np.array_equal(block.values, back.values)
        )
    check("modulation and permutation round trips", round_trip)

    calibration = True
    for snr_db in (0.0, 10.0):
        x = np.exp(1j * rng.uniform(0, 2 * np.pi, 100_000))
        y = apply_channel(x, np.ones_like(x), NoiseSpec(snr_db=snr_db), rng)
        calibration = calibration and abs(measured_snr(x, y) - snr_db) < 0.1
    check("noise calibration within 0.1 dB", calibration)

    small = replace(
        cfg,
        velocities=(15.0,),
        trials=2,
        trajectory_s=0.5,
        svg=False,
    )
    with tempfile.TemporaryDirectory() as tmp:
        a = replace(small, out_dir=Path(tmp) / "a")
        b = replace(small, out_dir=Path(tmp) / "b")
        run_nmse_table(a)
        run_nmse_table(b)
        same = all(
            (a.out_dir / name).read_bytes() == (b.out_dir / name).read_bytes()
            for name in ("nmse_table.csv", "nmse_table.json")
        )
    check("rerun with fixed seed is byte-identical", same)

    image = read_image(bundled_image_paths()[0])
    full = CodecConfig(block_edge=16, kept_coefficients=768)
    block, meta = encode(image, full)
    check("lossless codec round trip >= 50 dB", psnr(image, decode(block, meta)) >= 50.0)

    return ok


# --- output helpers -----------------------------------------------------------


def _dB_mean(values) -> float | str:
    if any(math.isinf(v) for v in values):
        return math.inf
    return statistics.fmean(values)


def _dB_std(values) -> float | str:
    if any(math.isinf(v) for v in values):
        return 0.0
    return statistics.pstdev(values)


def _jsonable_float(v):
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    return v


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return _jsonable_float(float(obj))
    if isinstance(obj, float):
        return _jsonable_float(obj)
    if isinstance(obj, Scenario):
        return obj.value
    return obj


def _json_dumps(payload) -> str:
    return json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n"


def _format_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if math.isinf(v):
        return "inf"
    return repr(v)


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        path.write_text(text, encoding="ascii")
    except OSError as exc:
        raise OSError(f"failed writing {path}: {exc}") from exc


def _emit(cfg: ExperimentConfig, stem: str, result: dict, header: list[str]) -> None:
    lines = [CSV_SCHEMA_TAG, ",".join(header)]
    for row in result["rows"]:
        lines.append(",".join(_format_cell(row[k]) for k in header))
    _write_text(cfg.out_dir / f"{stem}.csv", "\n".join(lines) + "\n")
    _write_text(cfg.out_dir / f"{stem}.json", _json_dumps(result))
