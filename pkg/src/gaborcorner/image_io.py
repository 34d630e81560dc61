"""Grayscale image and ground-truth file I/O plus overlay rendering."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from .errors import ConfigurationError, ImageFormatError, SizeError
from .evaluation import GroundTruth
from .filtering import ResponseStack, as_image
from .kernels import KernelBank

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def _round_half_up(values) -> np.ndarray:
    return np.floor(np.asarray(values, dtype=np.float64) + 0.5)


def load_image(path) -> np.ndarray:
    """Load a PGM (P2/P5) or PNG file as a float64 grayscale raster.

    Color PNGs collapse to luma 0.299 R + 0.587 G + 0.114 B, rounded
    half up. Gray values come back in [0, 255].
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ImageFormatError(f"cannot read {path}: {exc}") from exc
    if data[:2] in (b"P2", b"P5"):
        return _parse_pgm(data, path)
    if data[:8] == b"\x89PNG\r\n\x1a\n":
        return _parse_png(path)
    raise ImageFormatError(f"{path}: not a PGM (P2/P5) or PNG file")


def _pgm_header_tokens(data: bytes, count: int):
    """First `count` whitespace-delimited header tokens, skipping comments.

    Returns the tokens and the offset just past the single whitespace
    byte that terminates the last one.
    """
    tokens = []
    pos = 0
    while len(tokens) < count:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if pos == start:
            raise ImageFormatError("truncated PGM header")
        tokens.append(data[start:pos])
        pos += 1
    return tokens, pos


def _parse_pgm(data: bytes, path: Path) -> np.ndarray:
    try:
        (magic, w_tok, h_tok, max_tok), offset = _pgm_header_tokens(data, 4)
        width, height, maxval = int(w_tok), int(h_tok), int(max_tok)
    except (ValueError, ImageFormatError) as exc:
        raise ImageFormatError(f"{path}: bad PGM header ({exc})") from exc
    if width < 1 or height < 1:
        raise ImageFormatError(f"{path}: zero-sized PGM image")
    if not (0 < maxval < 65536):
        raise ImageFormatError(f"{path}: PGM maxval {maxval} out of range")
    count = width * height
    if magic == b"P2":
        values = data[offset - 1 :].split()
        if len(values) < count:
            raise ImageFormatError(f"{path}: truncated P2 payload")
        try:
            flat = np.array([int(v) for v in values[:count]], dtype=np.float64)
        except ValueError as exc:
            raise ImageFormatError(f"{path}: bad P2 sample ({exc})") from exc
    else:
        sample_type = ">u2" if maxval > 255 else np.uint8
        raw = data[offset : offset + count * (2 if maxval > 255 else 1)]
        if len(raw) < count * (2 if maxval > 255 else 1):
            raise ImageFormatError(f"{path}: truncated P5 payload")
        flat = np.frombuffer(raw, dtype=sample_type).astype(np.float64)
    return flat.reshape(height, width)


def _parse_png(path: Path) -> np.ndarray:
    try:
        with PILImage.open(path) as im:
            im.load()
            mode = im.mode
            if mode == "L":
                return np.asarray(im, dtype=np.float64)
            if mode == "LA":
                return np.asarray(im.getchannel("L"), dtype=np.float64)
            if mode in ("P", "RGB", "RGBA"):
                rgb = np.asarray(im.convert("RGB"), dtype=np.float64)
                luma = (
                    LUMA_WEIGHTS[0] * rgb[..., 0]
                    + LUMA_WEIGHTS[1] * rgb[..., 1]
                    + LUMA_WEIGHTS[2] * rgb[..., 2]
                )
                return _round_half_up(luma)
            raise ImageFormatError(f"{path}: unsupported PNG mode {mode!r}")
    except (OSError, SyntaxError) as exc:
        raise ImageFormatError(f"{path}: cannot decode PNG ({exc})") from exc


def save_image(image, path) -> None:
    """Write a grayscale raster as 8-bit PGM (P5) or PNG by suffix."""
    img = as_image(image)
    quantized = np.clip(_round_half_up(img), 0.0, 255.0).astype(np.uint8)
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".pgm":
        header = f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii")
        path.write_bytes(header + quantized.tobytes())
    elif suffix == ".png":
        PILImage.fromarray(quantized, mode="L").save(path, format="PNG")
    else:
        raise ImageFormatError(f"unsupported output format {suffix!r} (use .pgm or .png)")


def load_ground_truth(path) -> GroundTruth:
    """Read a ground-truth JSON file with a top-level corners array."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ImageFormatError(f"cannot read ground truth {path}: {exc}") from exc
    if not isinstance(payload, dict) or "corners" not in payload:
        raise ImageFormatError(f"{path}: expected an object with a 'corners' array")
    corners = tuple((float(x), float(y)) for x, y in payload["corners"])
    return GroundTruth(corners=corners)


def save_ground_truth(ground_truth: GroundTruth, path, extra: dict | None = None) -> None:
    payload = {"corners": [[x, y] for x, y in ground_truth.corners]}
    if extra:
        payload.update(extra)
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


@dataclass(frozen=True)
class OverlayStyle:
    """Corner marker rendering options."""

    radius: int = 3
    shape: str = "cross"
    annotate: bool = False
    color: tuple[int, int, int] = (255, 0, 0)

    def __post_init__(self) -> None:
        if self.radius < 1:
            raise ConfigurationError(f"marker radius must be >= 1, got {self.radius}")
        if self.shape not in ("cross", "circle"):
            raise ConfigurationError(f"marker shape must be cross or circle, got {self.shape!r}")


# 3x5 digit glyphs for corner-index annotations.
_DIGITS = {
    "0": ("###", "# #", "# #", "# #", "###"),
    "1": (" # ", "## ", " # ", " # ", "###"),
    "2": ("###", "  #", "###", "#  ", "###"),
    "3": ("###", "  #", "###", "  #", "###"),
    "4": ("# #", "# #", "###", "  #", "  #"),
    "5": ("###", "#  ", "###", "  #", "###"),
    "6": ("###", "#  ", "###", "# #", "###"),
    "7": ("###", "  #", "  #", "  #", "  #"),
    "8": ("###", "# #", "###", "# #", "###"),
    "9": ("###", "# #", "###", "  #", "###"),
}


def _marker_pixels(x: int, y: int, style: OverlayStyle):
    if style.shape == "cross":
        pixels = {(x, y)}
        for d in range(1, style.radius + 1):
            pixels.update({(x - d, y), (x + d, y), (x, y - d), (x, y + d)})
        return pixels
    # Midpoint circle.
    pixels = set()
    cx, cy, r = x, y, style.radius
    px, py, err = r, 0, 1 - r
    while px >= py:
        for sx, sy in ((px, py), (py, px), (-py, px), (-px, py), (-px, -py), (-py, -px), (py, -px), (px, -py)):
            pixels.add((cx + sx, cy + sy))
        py += 1
        if err < 0:
            err += 2 * py + 1
        else:
            px -= 1
            err += 2 * (py - px) + 1
    return pixels


def _digit_pixels(text: str, x: int, y: int):
    pixels = set()
    for column, char in enumerate(text):
        glyph = _DIGITS.get(char)
        if glyph is None:
            continue
        for row, line in enumerate(glyph):
            for offset, cell in enumerate(line):
                if cell == "#":
                    pixels.add((x + column * 4 + offset, y + row))
    return pixels


def save_overlay(image, corners, style: OverlayStyle = OverlayStyle(), path=None) -> np.ndarray:
    """Composite corner markers over the image and write a PNG.

    Marker pixels outside the image are clipped; everything else stays
    untouched. Returns the RGB array (useful for tests); pass path=None
    to skip writing.
    """
    img = as_image(image)
    height, width = img.shape
    gray = np.clip(_round_half_up(img), 0.0, 255.0).astype(np.uint8)
    rgb = np.repeat(gray[:, :, None], 3, axis=2)
    for index, corner in enumerate(corners):
        if hasattr(corner, "x"):
            x, y = int(corner.x), int(corner.y)
        else:
            x, y = int(corner[0]), int(corner[1])
        if not (0 <= x < width and 0 <= y < height):
            raise SizeError(f"corner {(x, y)} outside image of shape {img.shape}")
        pixels = _marker_pixels(x, y, style)
        if style.annotate:
            pixels |= _digit_pixels(str(index), x + style.radius + 2, y - style.radius)
        for px, py in pixels:
            if 0 <= px < width and 0 <= py < height:
                rgb[py, px] = style.color
    if path is not None:
        PILImage.fromarray(rgb, mode="RGB").save(Path(path), format="PNG")
    return rgb


def write_kernel_dump(bank: KernelBank, directory) -> list[Path]:
    """Raw little-endian float64 grids plus text sidecars, one per kernel."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for s, frequency in enumerate(bank.frequencies):
        for k in range(bank.directions):
            grid = bank.kernel(s, k)
            theta = k * math.pi / bank.directions
            stem = directory / f"gabor_f{frequency:g}_k{k}"
            raw = stem.with_suffix(".f64")
            raw.write_bytes(grid.taps.astype("<f8").tobytes())
            stem.with_suffix(".txt").write_text(
                f"side={grid.side}\nf={frequency!r}\ntheta={theta!r}\n"
                f"gamma={bank.gamma!r}\neta={bank.eta!r}\n"
            )
            written.append(raw)
    return written


def write_response_dump(stack: ResponseStack, directory) -> list[Path]:
    """Raw little-endian float64 planes plus text sidecars, one per plane."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    height, width = stack.planes.shape[2:]
    for s, frequency in enumerate(stack.frequencies):
        for k in range(stack.directions):
            theta = k * math.pi / stack.directions
            stem = directory / f"response_f{frequency:g}_k{k}"
            raw = stem.with_suffix(".f64")
            raw.write_bytes(stack.plane(s, k).astype("<f8").tobytes())
            stem.with_suffix(".txt").write_text(
                f"width={width}\nheight={height}\nf={frequency!r}\ntheta={theta!r}\n"
            )
            written.append(raw)
    return written
