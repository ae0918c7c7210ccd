"""Shared test helpers: independent oracles and frame builders.

The oracles deliberately avoid the library's kernels: counting is done
per-pixel in Python, entropy by direct summation with math.log2, correlation
by the textbook two-pass covariance quotient, and segmented entropy by
materialising each segment as its own little image.
"""

from __future__ import annotations

import math

import numpy as np

from entropykf import kernels
from entropykf.ingest import Frame


def pytest_sessionstart(session):
    # compile the jitted kernels once so timed tests measure steady state
    kernels.warmup()


def histogram_oracle(pixels: np.ndarray) -> list[int]:
    counts = [0] * 256
    for v in pixels.ravel().tolist():
        counts[v] += 1
    return counts


def entropy_oracle(pixels: np.ndarray) -> float:
    counts = histogram_oracle(pixels)
    total = pixels.size
    en = 0.0
    for c in counts:
        if c:
            p = c / total
            en -= p * math.log2(p)
    return en


def segment_slices(n: int) -> list[slice]:
    step = n // 8
    return [slice(i * step, n if i == 7 else (i + 1) * step) for i in range(8)]


def segmented_oracle(pixels: np.ndarray) -> np.ndarray:
    """Materialise every grid segment as its own frame and recompute."""
    from entropykf.entropy import entropy, histogram
    rows = segment_slices(pixels.shape[0])
    cols = segment_slices(pixels.shape[1])
    out = np.empty(64)
    for sy in range(8):
        for sx in range(8):
            block = np.ascontiguousarray(pixels[rows[sy], cols[sx]])
            out[sy * 8 + sx] = entropy(histogram(block))
    return out


def correlation_oracle(a: np.ndarray, b: np.ndarray) -> float:
    x = a.ravel().astype(np.float64)
    y = b.ravel().astype(np.float64)
    xc = x - x.mean()
    yc = y - y.mean()
    return float((xc * yc).mean() / (x.std() * y.std()))


def rand_pixels(rng: np.random.Generator, width: int, height: int,
                levels: int = 256) -> np.ndarray:
    return rng.integers(0, levels, (height, width), dtype=np.uint8)


def frame(index: int, pixels: np.ndarray) -> Frame:
    return Frame(index=index, pixels=pixels)


def uniform_level_pixels(side: int, levels: int) -> np.ndarray:
    """A side x side frame whose histogram is exactly uniform over `levels`
    grey values, giving entropy exactly log2(levels)."""
    n = side * side
    assert n % levels == 0
    values = np.repeat(np.arange(levels, dtype=np.uint8), n // levels)
    return values.reshape(side, side)


def make_y4m(width: int, height: int, frames, colorspace: str = "420") -> bytes:
    """Assemble a YUV4MPEG2 byte stream from Y planes, chroma filled flat."""
    chroma = {"420": (width // 2) * (height // 2) * 2,
              "422": (width // 2) * height * 2,
              "444": width * height * 2,
              "mono": 0}[colorspace]
    buf = bytearray(f"YUV4MPEG2 W{width} H{height} F25:1 Ip A1:1 C{colorspace}\n".encode())
    for px in frames:
        buf += b"FRAME\n"
        buf += px.tobytes()
        buf += bytes([128]) * chroma
    return bytes(buf)
