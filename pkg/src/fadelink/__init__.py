"""fadelink: deterministic feature and image transmission over
time-selective fading channels with pilot-aged CSI."""

from .aging import (
    AgingSchedule,
    Scenario,
    Side,
    SideInfo,
    csi_estimate,
    csi_nmse,
    side_info,
    tau_ag,
    tau_attn,
    timeline,
)
from .channel import (
    DEFAULT_TIME_STEP_S,
    LIGHTSPEED_MPS,
    ChannelConfig,
    ChannelPipeline,
    ChannelRealization,
    NoiseSpec,
    PathComponent,
    apply_channel,
    channel_preset,
    normalized_doppler,
    phase_at,
    realize_channel,
    synthesize_paths,
)
from .codec import (
    CodecConfig,
    CodecMeta,
    bundled_image_paths,
    compression_ratio,
    decode,
    encode,
    read_image,
    read_ppm,
    write_image,
    write_ppm,
)
from .harness import (
    ExperimentConfig,
    TrialRecord,
    run_nmse_table,
    run_perm_gain,
    run_snr_sweep,
    run_transmit,
    selftest,
)
from .metrics import QualityReport, measured_snr, mse, psnr, spearman
from .transport import (
    FeatureBlock,
    PermutationRule,
    SlotScore,
    SymbolFrame,
    ZeroForcingError,
    build_permutation,
    demodulate,
    impairment,
    inverse_permute,
    modulate,
    permute,
    perturb,
    score_slots,
    tau_permu,
    transmit,
)

__version__ = "0.1.0"
