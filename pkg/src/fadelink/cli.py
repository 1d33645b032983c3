"""Command-line front end for the experiment harness.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime error,
3 selftest or invariant failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import fields
from pathlib import Path

from .aging import Scenario
from .harness import (
    ExperimentConfig,
    run_nmse_table,
    run_perm_gain,
    run_snr_sweep,
    run_transmit,
    selftest,
)


class _Parser(argparse.ArgumentParser):
    """argparse parser that reports usage errors with exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _float_list(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError("list must not be empty")
    if any(math.isnan(v) for v in values):
        raise argparse.ArgumentTypeError("NaN is not a valid sweep value")
    return values


def _scenario(text: str) -> Scenario:
    try:
        return Scenario(text.lower())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"scenario must be 'withcp' or 'aging', got {text!r}"
        ) from exc


def _bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


# Flag name -> (value parser, ExperimentConfig field, help text). Config-file
# keys use exactly these names, so every key is overridable by the flag.
_OPTIONS = {
    "seed": (int, "seed", "base seed for all derived streams"),
    "trials": (int, "trials", "trial count per sweep cell"),
    "velocities": (_float_list, "velocities", "comma-separated velocities in m/s"),
    "snr": (_float_list, "snr_list_db", "comma-separated SNRs in dB (inf allowed)"),
    "scenario": (_scenario, "scenario", "CSI scenario: withcp or aging"),
    "pilot-period-ms": (float, None, "pilot period in milliseconds"),
    "carrier-hz": (float, "carrier_hz", "carrier frequency in Hz"),
    "trajectory-s": (float, "trajectory_s", "channel trajectory duration in seconds"),
    "path-count": (int, "path_count", "multipath component count"),
    "block-edge": (int, "block_edge", "codec tile edge in pixels"),
    "kept-coefficients": (int, "kept_coefficients", "retained channels per tile (C)"),
    "noise-weight": (float, "noise_weight", "slot-score weight of the noise term"),
    "aging-weight": (float, "aging_weight", "slot-score weight of the aging term"),
    "out": (Path, None, "output directory"),
    "svg": (_bool, "svg", "also emit SVG charts (true/false)"),
}


def load_config_file(path) -> dict[str, str]:
    """Parse the flat key=value config format (# starts a comment)."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _OPTIONS and key != "image":
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = value.strip()
    return values


def _apply_option(overrides: dict, key: str, raw_value):
    parse, field_name, _ = _OPTIONS[key]
    value = parse(raw_value) if isinstance(raw_value, str) else raw_value
    if key == "pilot-period-ms":
        overrides["pilot_period_s"] = float(value) * 1e-3
    elif key == "out":
        overrides["out_dir"] = Path(value)
    else:
        overrides[field_name] = value


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    """Merge defaults, the config file, then explicit CLI flags."""
    overrides: dict = {}
    if args.config:
        for key, raw in load_config_file(args.config).items():
            if key == "image":
                overrides["images"] = tuple(
                    part.strip() for part in raw.split(",") if part.strip()
                )
            else:
                _apply_option(overrides, key, raw)
    for key in _OPTIONS:
        attr = key.replace("-", "_")
        value = getattr(args, attr, None)
        if value is not None:
            _apply_option(overrides, key, value)
    if getattr(args, "image", None):
        overrides["images"] = tuple(str(p) for p in args.image)
    valid = {f.name for f in fields(ExperimentConfig)}
    unknown = set(overrides) - valid
    if unknown:
        raise ValueError(f"internal option mapping error: {unknown}")
    return ExperimentConfig(**overrides)


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH", help="flat key=value config file")
    for key, (parse, _, help_text) in _OPTIONS.items():
        if key == "svg":
            parser.add_argument(
                "--svg", nargs="?", const=True, default=None, type=_bool, help=help_text
            )
            continue
        parser.add_argument(f"--{key}", type=parse, default=None, help=help_text)
    parser.add_argument(
        "--image",
        action="append",
        metavar="PATH",
        help="input image (repeatable); defaults to the bundled test images",
    )


def build_parser() -> _Parser:
    parser = _Parser(
        prog="fadelink",
        description="Deterministic fading-channel transmission experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, help_text in (
        ("nmse-table", "aging-CSI NMSE per velocity"),
        ("perm-gain", "scored vs identity permutation PSNR, paired trials"),
        ("snr-sweep", "PSNR vs SNR per scenario, paired trials"),
        ("selftest", "fast invariant battery"),
    ):
        _add_common_flags(sub.add_parser(name, help=help_text))

    transmit = sub.add_parser("transmit", help="run the pipeline once on an image")
    _add_common_flags(transmit)
    transmit.add_argument(
        "image_path", nargs="?", metavar="IMAGE", help="image to transmit"
    )
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        cfg = build_config(args)
    except (ValueError, OSError) as exc:
        print(f"fadelink: error: {exc}", file=sys.stderr)
        return 1

    try:
        if args.command == "nmse-table":
            result = run_nmse_table(cfg)
            _summarize(cfg, result)
        elif args.command == "perm-gain":
            result = run_perm_gain(cfg)
            _summarize(cfg, result)
        elif args.command == "snr-sweep":
            result = run_snr_sweep(cfg)
            _summarize(cfg, result)
        elif args.command == "transmit":
            record = run_transmit(cfg, args.image_path)
            report = record.report.to_jsonable()
            print(
                f"transmit: psnr={report['psnr_db']} dB nmse={report['nmse']:.6g} "
                f"-> {cfg.out_dir / 'reconstructed.ppm'}"
            )
        elif args.command == "selftest":
            return 0 if selftest(cfg) else 3
        else:  # pragma: no cover - argparse enforces the choices
            raise ValueError(f"unknown command {args.command!r}")
    except (ValueError, OSError) as exc:
        print(f"fadelink: error: {exc}", file=sys.stderr)
        return 2
    return 0


def _summarize(cfg: ExperimentConfig, result: dict) -> None:
    print(
        f"{result['experiment']}: {len(result['rows'])} rows -> "
        f"{cfg.out_dir}"
    )


if __name__ == "__main__":
    sys.exit(main())
