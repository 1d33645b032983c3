"""Ship an image through the whole pipeline and look at what arrives.

encode -> score -> permute -> modulate -> faded noisy channel with ZF
equalization -> demodulate -> restore -> decode. Runs the link at a few
SNRs under both acquisition scenarios and writes the reconstructions next
to this script, plus an SVG chart of a miniature PSNR sweep.
"""

import math
from dataclasses import replace
from pathlib import Path

import fadelink as fl

out_dir = Path(__file__).resolve().parent / "output"
out_dir.mkdir(exist_ok=True)

image_path = fl.bundled_image_paths()[0]
image = fl.read_image(image_path)
print(f"transmitting {image_path.name} ({image.shape[0]}x{image.shape[1]}), "
      f"CR = {fl.compression_ratio(fl.CodecConfig(16, 128), 128, 128, 3)}")

base = fl.ExperimentConfig(
    velocities=(15.0,),
    trials=1,
    seed=5,
    images=(str(image_path),),
    out_dir=out_dir,
)

# Single transmissions at three SNRs under the aging scenario.
for snr_db in (0.0, 6.0, 18.0):
    cfg = replace(base, snr_list_db=(snr_db,), out_dir=out_dir / f"snr{snr_db:g}")
    record = fl.run_transmit(cfg)
    print(f"  aging, {snr_db:5.1f} dB -> PSNR {record.report.psnr_db:6.2f} dB, "
          f"CSI NMSE {record.report.nmse:.3f}  "
          f"({cfg.out_dir / 'reconstructed.ppm'})")

# The noiseless + prediction reference: the channel becomes transparent.
cfg = replace(
    base,
    snr_list_db=(math.inf,),
    scenario=fl.Scenario.WITH_CP,
    out_dir=out_dir / "reference",
)
record = fl.run_transmit(cfg)
print(f"  prediction, noiseless -> PSNR {record.report.psnr_db:6.2f} dB "
      f"(codec truncation only)")

# A miniature sweep with the chart enabled; heavier sweeps run from the CLI.
sweep_cfg = replace(
    base,
    snr_list_db=(-6.0, 0.0, 6.0, 12.0, 18.0),
    trials=40,
    trajectory_s=2.0,
    svg=True,
    out_dir=out_dir / "sweep",
)
rows = fl.run_snr_sweep(sweep_cfg)["rows"]
print("\nmean PSNR over 40 paired trials:")
for scenario in ("withcp", "aging"):
    curve = [(r["snr_db"], r["mean_psnr_db"]) for r in rows
             if r["scenario"] == scenario]
    rendered = "  ".join(f"{s:+.0f}dB:{p:5.2f}" for s, p in curve)
    print(f"  {scenario:7s} {rendered}")
print(f"chart: {sweep_cfg.out_dir / 'snr_sweep.svg'}")
