"""Frame sources: PGM directories, raw 8-bit luma streams, and Y4M streams.

Every source is normalised to a pull-based stream of 8-bit grayscale
``Frame`` values with consecutive zero-based indices.  Container decoding is
out of scope; compressed video is piped in as raw gray or Y4M (see README
for the ffmpeg recipes).
"""

from __future__ import annotations

import enum
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Iterator

import numpy as np


class IngestError(Exception):
    """A frame source could not be opened or decoded."""


class SourceKind(str, enum.Enum):
    PGM_DIR = "pgm-dir"       # directory of binary PGM (P5) files
    RAW = "raw"               # tightly packed 8-bit luma, frame-major
    Y4M = "y4m"               # YUV4MPEG2; only the Y plane is consumed

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class SourceSpec:
    """Where frames come from and, for raw streams, their dimensions."""

    kind: SourceKind
    path: str  # filesystem path, or "-" for stdin (raw / y4m only)
    width: int | None = None
    height: int | None = None

    def __post_init__(self):
        kind = SourceKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is SourceKind.RAW and (self.width is None or self.height is None):
            raise ValueError("raw sources need explicit --width and --height")
        for name, value in (("width", self.width), ("height", self.height)):
            if value is not None and value < 8:
                raise ValueError(f"{name} must be at least 8 (got {value}); "
                                 "the 8x8 segment grid needs 8 pixels per axis")
        if self.path == "-" and kind is SourceKind.PGM_DIR:
            raise ValueError("a PGM directory cannot be read from stdin")


@dataclass(frozen=True, eq=False)
class Frame:
    """One 8-bit grayscale frame with its position in the stream."""

    index: int
    pixels: np.ndarray  # (height, width) uint8, row-major

    def __post_init__(self):
        if self.index < 0:
            raise ValueError("frame index must be non-negative")
        if self.pixels.ndim != 2 or self.pixels.dtype != np.uint8:
            raise ValueError("pixels must be a 2-D uint8 array")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


def to_grayscale(r: int, g: int, b: int) -> int:
    """BT.601 luma of an RGB triple, rounded half up and clamped to [0, 255]."""
    for name, v in (("r", r), ("g", g), ("b", b)):
        if not 0 <= v <= 255:
            raise ValueError(f"{name}={v} outside [0, 255]")
    y = int(0.299 * r + 0.587 * g + 0.114 * b + 0.5)
    return min(255, max(0, y))


# ---------------------------------------------------------------------------
# PGM (binary P5, maxval 255)
# ---------------------------------------------------------------------------

def _parse_pgm(data: bytes, name: str) -> np.ndarray:
    """Decode a binary P5 PGM.  Comments are allowed anywhere in the header."""
    pos = 0
    tokens: list[bytes] = []
    while len(tokens) < 4:
        if pos >= len(data):
            raise IngestError(f"unsupported image file: {name} (truncated PGM header)")
        c = data[pos:pos + 1]
        if c == b"#":
            nl = data.find(b"\n", pos)
            pos = len(data) if nl < 0 else nl + 1
        elif c.isspace():
            pos += 1
        else:
            end = pos
            while end < len(data) and not data[end:end + 1].isspace() and data[end:end + 1] != b"#":
                end += 1
            tokens.append(data[pos:end])
            pos = end
    if tokens[0] != b"P5":
        raise IngestError(f"unsupported image file: {name} "
                          f"(expected binary PGM magic P5, found {tokens[0]!r})")
    try:
        width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    except ValueError:
        raise IngestError(f"unsupported image file: {name} (malformed PGM header)") from None
    if maxval != 255:
        raise IngestError(f"unsupported image file: {name} (maxval {maxval}, only 255 supported)")
    if width <= 0 or height <= 0:
        raise IngestError(f"unsupported image file: {name} (bad dimensions {width}x{height})")
    pos += 1  # single whitespace byte separates maxval from the raster
    raster = data[pos:pos + width * height]
    if len(raster) != width * height:
        raise IngestError(f"unsupported image file: {name} "
                          f"(raster holds {len(raster)} bytes, expected {width * height})")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width)


def read_pgm(path: str | Path) -> np.ndarray:
    """Read one binary PGM file into a (height, width) uint8 array."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    return _parse_pgm(data, str(path))


def write_pgm(path: str | Path, pixels: np.ndarray) -> None:
    """Write a (height, width) uint8 array as a binary PGM with maxval 255."""
    pixels = np.ascontiguousarray(pixels, dtype=np.uint8)
    if pixels.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {pixels.shape}")
    h, w = pixels.shape
    header = f"P5\n{w} {h}\n255\n".encode("ascii")
    Path(path).write_bytes(header + pixels.tobytes())


def list_pgm_dir(path: str | Path) -> list[Path]:
    """Files of a frame directory in strict lexicographic filename order."""
    path = Path(path)
    if not path.is_dir():
        raise IngestError(f"not a readable directory: {path}")
    files = sorted((p for p in path.iterdir() if p.is_file()), key=lambda p: p.name)
    if not files:
        raise IngestError(f"no frame files in directory: {path}")
    return files


def _iter_pgm_dir(spec: SourceSpec) -> Iterator[Frame]:
    for index, path in enumerate(list_pgm_dir(spec.path)):
        yield Frame(index=index, pixels=read_pgm(path))


# ---------------------------------------------------------------------------
# raw 8-bit luma stream
# ---------------------------------------------------------------------------

def _read_exact(stream: BinaryIO, n: int) -> bytes:
    """Read exactly n bytes, tolerating the short reads pipes produce."""
    chunks = []
    remaining = n
    while remaining > 0:
        chunk = stream.read(remaining)
        if not chunk:
            break
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def _iter_raw(stream: BinaryIO, width: int, height: int) -> Iterator[Frame]:
    frame_size = width * height
    index = 0
    while True:
        data = _read_exact(stream, frame_size)
        if not data:
            return
        if len(data) != frame_size:
            offset = index * frame_size
            raise IngestError(
                f"raw stream truncated at byte offset {offset}: frame {index} "
                f"has {len(data)} of {frame_size} bytes "
                f"(stream length is not a multiple of {width}x{height})")
        yield Frame(index=index, pixels=np.frombuffer(data, dtype=np.uint8).reshape(height, width))
        index += 1


# ---------------------------------------------------------------------------
# YUV4MPEG2
# ---------------------------------------------------------------------------

_CHROMA_FACTORS = {
    # plane bytes per frame beyond the Y plane, as a function of (w, h)
    "420": lambda w, h: 2 * ((w + 1) // 2) * ((h + 1) // 2),
    "422": lambda w, h: 2 * ((w + 1) // 2) * h,
    "444": lambda w, h: 2 * w * h,
    "mono": lambda w, h: 0,
}


def _chroma_bytes(colorspace: str, w: int, h: int) -> int:
    if colorspace.startswith("420"):
        key = "420"
    elif colorspace in _CHROMA_FACTORS:
        key = colorspace
    elif colorspace.startswith("422"):
        key = "422"
    elif colorspace.startswith("444") and colorspace != "444alpha":
        key = "444"
    else:
        raise IngestError(f"unsupported Y4M colorspace C{colorspace}")
    return _CHROMA_FACTORS[key](w, h)


def _read_line(stream: BinaryIO, limit: int = 1024) -> bytes:
    """Read bytes up to and excluding a newline; bounded to catch garbage."""
    out = bytearray()
    while len(out) < limit:
        c = stream.read(1)
        if not c:
            return bytes(out)
        if c == b"\n":
            return bytes(out)
        out += c
    raise IngestError("Y4M header line exceeds 1024 bytes; not a Y4M stream?")


def _iter_y4m(stream: BinaryIO) -> Iterator[Frame]:
    header = _read_line(stream)
    if not header.startswith(b"YUV4MPEG2"):
        raise IngestError("missing YUV4MPEG2 signature at byte offset 0")
    width = height = None
    colorspace = "420"
    for param in header.split(b" ")[1:]:
        if not param:
            continue
        tag, value = param[:1], param[1:].decode("ascii", "replace")
        if tag == b"W":
            width = int(value)
        elif tag == b"H":
            height = int(value)
        elif tag == b"C":
            colorspace = value
    if not width or not height:
        raise IngestError("Y4M header lacks W/H dimensions")
    y_size = width * height
    skip = _chroma_bytes(colorspace, width, height)
    offset = len(header) + 1
    index = 0
    while True:
        marker = _read_line(stream)
        if not marker:
            return
        if not marker.startswith(b"FRAME"):
            raise IngestError(f"expected FRAME marker at byte offset {offset}, "
                              f"found {marker[:16]!r}")
        offset += len(marker) + 1
        data = _read_exact(stream, y_size)
        if len(data) != y_size:
            raise IngestError(f"Y4M stream truncated at byte offset {offset}: "
                              f"frame {index} Y plane has {len(data)} of {y_size} bytes")
        offset += y_size
        if skip:
            chroma = _read_exact(stream, skip)
            if len(chroma) != skip:
                raise IngestError(f"Y4M stream truncated at byte offset {offset}: "
                                  f"frame {index} chroma has {len(chroma)} of {skip} bytes")
            offset += skip
        yield Frame(index=index, pixels=np.frombuffer(data, dtype=np.uint8).reshape(height, width))
        index += 1


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def _open_binary(path: str) -> BinaryIO:
    if path == "-":
        return sys.stdin.buffer
    try:
        return open(path, "rb")
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc


def open_source(spec: SourceSpec) -> Iterator[Frame]:
    """Open a frame source as a single-consumer stream of Frames.

    Opening the same file or directory source twice yields byte-identical
    frame sequences; stdin sources are consumed once by nature.
    """
    if spec.kind is SourceKind.PGM_DIR:
        return _iter_pgm_dir(spec)
    if spec.kind is SourceKind.RAW:
        return _iter_raw(_open_binary(spec.path), spec.width, spec.height)
    return _iter_y4m(_open_binary(spec.path))
