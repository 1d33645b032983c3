"""Blockwise cosine-transform image codec with a known importance ordering.

Images are cut into square tiles (one token each); every tile undergoes an
orthogonal 2-D DCT per color plane, coefficients are read in zig-zag order
and the leading ones kept. The retained coefficients form the feature
block, standardized per channel to unit power so the transmit constraint
holds, and each channel's raw energy yields the importance order that the
permutation transport consumes. The transform is exactly invertible, so
full-coefficient round trips lose only 8-bit quantization.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.fft import dctn, idctn

# Pixel level shift applied before the transform, as in classic DCT codecs;
# a zero coefficient block therefore decodes to mid-gray.
LEVEL_SHIFT = 128.0

# Channels whose coefficient spread falls below this are passed through
# unscaled (their standardized values are identically zero).
_SCALE_FLOOR = 1e-12


def zigzag_order(edge: int) -> np.ndarray:
    """(edge^2, 2) row/column indices in low-to-high-frequency zig-zag order."""
    order = []
    for s in range(2 * edge - 1):
        diag = [(i, s - i) for i in range(max(0, s - edge + 1), min(s, edge - 1) + 1)]
        if s % 2 == 0:
            diag.reverse()
        order.extend(diag)
    return np.array(order, dtype=np.intp)


@dataclass(frozen=True)
class CodecConfig:
    """Tile geometry and retention budget.

    ``kept_coefficients`` is the number of feature-channels retained per
    tile (across all color planes), so it equals the block's channel count
    C and must be even. Coefficients are taken in zig-zag order,
    interleaving color planes at each frequency position.
    """

    block_edge: int = 16
    kept_coefficients: int = 128

    def __post_init__(self) -> None:
        if self.block_edge < 1:
            raise ValueError("block_edge must be >= 1")
        if self.kept_coefficients < 2 or self.kept_coefficients % 2 != 0:
            raise ValueError("kept_coefficients must be an even count >= 2")


@dataclass(frozen=True)
class CodecMeta:
    """Out-of-band reconstruction metadata (never sent over the channel).

    Holds the per-channel standardization statistics, the raw channel
    energies, and the complex-slot importance order (most important first).
    """

    config: CodecConfig
    height: int
    width: int
    color_count: int
    channel_offset: np.ndarray
    channel_scale: np.ndarray
    channel_energy: np.ndarray
    importance: np.ndarray

    @classmethod
    def neutral(
        cls, config: CodecConfig, height: int, width: int, color_count: int
    ) -> "CodecMeta":
        """Identity statistics: no offset, unit scale, natural importance."""
        c = config.kept_coefficients
        return cls(
            config=config,
            height=height,
            width=width,
            color_count=color_count,
            channel_offset=np.zeros(c),
            channel_scale=np.ones(c),
            channel_energy=np.zeros(c),
            importance=np.arange(c // 2, dtype=np.intp),
        )

    @property
    def token_count(self) -> int:
        edge = self.config.block_edge
        return (self.height // edge) * (self.width // edge)


def _validate_image(image) -> np.ndarray:
    arr = np.asarray(image)
    if arr.ndim != 3:
        raise ValueError("image must be a (height, width, colors) array")
    if arr.dtype != np.uint8:
        raise ValueError(f"image samples must be 8-bit, got dtype {arr.dtype}")
    return arr


def _to_tiles(image: np.ndarray, edge: int) -> np.ndarray:
    h, w, m = image.shape
    tiles = image.reshape(h // edge, edge, w // edge, edge, m)
    return tiles.transpose(0, 2, 1, 3, 4).reshape(-1, edge, edge, m)


def _from_tiles(tiles: np.ndarray, height: int, width: int) -> np.ndarray:
    edge, m = tiles.shape[1], tiles.shape[3]
    grid = tiles.reshape(height // edge, width // edge, edge, edge, m)
    return grid.transpose(0, 2, 1, 3, 4).reshape(height, width, m)


def _channel_positions(config: CodecConfig, color_count: int) -> tuple:
    """Map channel index -> (zig-zag row, zig-zag col, color plane).

    Channels interleave color planes at each zig-zag position, so channel
    ch covers frequency position ch // m of color plane ch % m.
    """
    edge = config.block_edge
    c = config.kept_coefficients
    if c > edge * edge * color_count:
        raise ValueError(
            f"kept_coefficients {c} exceeds the {edge * edge * color_count} "
            "coefficients available per tile"
        )
    zz = zigzag_order(edge)
    ch = np.arange(c)
    rows = zz[ch // color_count, 0]
    cols = zz[ch // color_count, 1]
    planes = ch % color_count
    return rows, cols, planes


def encode(image, config: CodecConfig):
    """Transform an image into a standardized feature block.

    Returns ``(block, meta)`` where ``meta`` carries the standardization
    statistics and the importance order over complex slots (pairs of
    channels k and k+K ranked by descending raw energy, ties by index).
    """
    from .transport import FeatureBlock

    arr = _validate_image(image)
    h, w, m = arr.shape
    edge = config.block_edge
    if h % edge != 0 or w % edge != 0:
        raise ValueError(
            f"block edge {edge} does not divide image dimensions {h}x{w}"
        )
    tiles = _to_tiles(arr, edge).astype(np.float64) - LEVEL_SHIFT
    coeffs = dctn(tiles, type=2, axes=(1, 2), norm="ortho")
    rows, cols, planes = _channel_positions(config, m)
    values = coeffs[:, rows, cols, planes]  # (L, C)

    energy = np.mean(values**2, axis=0)
    offset = np.mean(values, axis=0)
    centered = values - offset
    scale = np.sqrt(np.mean(centered**2, axis=0))
    scale = np.where(scale < _SCALE_FLOOR, 1.0, scale)

    k_count = config.kept_coefficients // 2
    pair_energy = energy[:k_count] + energy[k_count:]
    importance = np.argsort(-pair_energy, kind="stable")

    meta = CodecMeta(
        config=config,
        height=h,
        width=w,
        color_count=m,
        channel_offset=offset,
        channel_scale=scale,
        channel_energy=energy,
        importance=importance,
    )
    return FeatureBlock(values=centered / scale), meta


def decode(block, meta: CodecMeta) -> np.ndarray:
    """Invert standardization and the tile transform; clamp to 8-bit pixels."""
    edge = meta.config.block_edge
    expected = (meta.token_count, meta.config.kept_coefficients)
    if block.values.shape != expected:
        raise ValueError(
            f"block shape {block.values.shape} does not match codec shape {expected}"
        )
    values = block.values * meta.channel_scale + meta.channel_offset
    rows, cols, planes = _channel_positions(meta.config, meta.color_count)
    coeffs = np.zeros((meta.token_count, edge, edge, meta.color_count))
    coeffs[:, rows, cols, planes] = values
    tiles = idctn(coeffs, type=2, axes=(1, 2), norm="ortho") + LEVEL_SHIFT
    pixels = np.clip(np.rint(tiles), 0, 255).astype(np.uint8)
    return _from_tiles(pixels, meta.height, meta.width)


def compression_ratio(
    config: CodecConfig, height: int, width: int, colors: int
) -> Fraction:
    """Transmitted real values over source pixel values, as an exact rational."""
    edge = config.block_edge
    if height % edge != 0 or width % edge != 0:
        raise ValueError(f"block edge {edge} does not divide {height}x{width}")
    tokens = (height // edge) * (width // edge)
    return Fraction(tokens * config.kept_coefficients, height * width * colors)


# --- image file I/O -------------------------------------------------------


def read_ppm(path) -> np.ndarray:
    """Read a binary (P6) PPM file with 8-bit samples."""
    data = Path(path).read_bytes()

    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError(f"{path}: truncated PPM header")
        fields.append(data[start:pos])
    pos += 1  # single whitespace after maxval

    if fields[0] != b"P6":
        raise ValueError(f"{path}: not a binary PPM (P6) file")
    width, height, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval != 255:
        raise ValueError(f"{path}: only 8-bit PPM supported, maxval {maxval}")
    expected = width * height * 3
    raster = data[pos : pos + expected]
    if len(raster) != expected:
        raise ValueError(f"{path}: raster truncated")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3)


def write_ppm(path, image) -> None:
    """Write an 8-bit RGB image as binary (P6) PPM."""
    arr = _validate_image(image)
    if arr.shape[2] != 3:
        raise ValueError("PPM output requires a 3-channel image")
    h, w, _ = arr.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(arr.tobytes())


def read_image(path) -> np.ndarray:
    """Read an 8-bit RGB image; PPM natively, other formats via Pillow."""
    p = Path(path)
    if p.suffix.lower() == ".ppm":
        return read_ppm(p)
    try:
        from PIL import Image as PILImage
    except ImportError as exc:
        raise ValueError(
            f"{path}: reading non-PPM images requires Pillow (pip install Pillow)"
        ) from exc
    with PILImage.open(p) as img:
        return np.asarray(img.convert("RGB"), dtype=np.uint8)


def write_image(path, image) -> None:
    """Write an 8-bit RGB image; PPM natively, other formats via Pillow."""
    p = Path(path)
    if p.suffix.lower() == ".ppm":
        write_ppm(p, image)
        return
    try:
        from PIL import Image as PILImage
    except ImportError as exc:
        raise ValueError(
            f"{path}: writing non-PPM images requires Pillow (pip install Pillow)"
        ) from exc
    PILImage.fromarray(_validate_image(image)).save(p)


def bundled_image_paths() -> list[Path]:
    """Paths of the test images shipped with the package."""
    root = resources.files("fadelink").joinpath("data")
    return sorted(Path(str(entry)) for entry in root.iterdir() if entry.name.endswith(".ppm"))
