"""Frame/volume data model, the column-major vec operator, and AWGN injection.

A frame is a 2-D float array indexed ``[row, col]`` (height x width). A video
volume is a 3-D float array indexed ``[t, row, col]``. Both are plain numpy
arrays; the helpers here validate and normalize them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, ShapeError

MIN_SIDE = 3


def as_frame(data) -> np.ndarray:
    """Validate ``data`` as a frame and return it as a float64 array."""
    frame = np.asarray(data, dtype=np.float64)
    if frame.ndim != 2:
        raise ShapeError(f"frame must be 2-D, got shape {frame.shape}")
    if min(frame.shape) < MIN_SIDE:
        raise ShapeError(f"frame must be at least {MIN_SIDE}x{MIN_SIDE}, got {frame.shape}")
    return frame


def as_volume(data, min_frames: int = 2) -> np.ndarray:
    """Validate ``data`` as a ``(T, H, W)`` volume and return it as float64.

    A sequence of equally shaped frames is stacked along the first axis.
    """
    if isinstance(data, (list, tuple)):
        shapes = {np.shape(f) for f in data}
        if len(shapes) > 1:
            raise ShapeError(f"frames differ in shape: {sorted(shapes)}")
    vol = np.asarray(data, dtype=np.float64)
    if vol.ndim != 3:
        raise ShapeError(f"volume must be 3-D (T, H, W), got shape {vol.shape}")
    if min(vol.shape[1:]) < MIN_SIDE:
        raise ShapeError(f"frames must be at least {MIN_SIDE}x{MIN_SIDE}, got {vol.shape[1:]}")
    if vol.shape[0] < min_frames:
        raise InsufficientDataError(f"need at least {min_frames} frames, got {vol.shape[0]}")
    return vol


def normalize(data, maxval: float | None = None) -> np.ndarray:
    """Map integer intensities to [0, 1] by dividing by the format maximum.

    Float input is returned unchanged (as float64) unless ``maxval`` is given.
    """
    arr = np.asarray(data)
    if maxval is None:
        if np.issubdtype(arr.dtype, np.integer):
            maxval = np.iinfo(arr.dtype).max
        else:
            return arr.astype(np.float64)
    return arr.astype(np.float64) / float(maxval)


def vec_flatten(frame) -> np.ndarray:
    """Column-wise vectorization: stack the columns of ``frame`` top to bottom."""
    return np.asarray(frame).ravel(order="F")


def vec_unflatten(seq, width: int, height: int) -> np.ndarray:
    """Inverse of :func:`vec_flatten`."""
    seq = np.asarray(seq)
    if seq.ndim != 1 or seq.size != width * height:
        raise ShapeError(
            f"cannot reshape sequence of length {seq.size} into {height}x{width} frame"
        )
    return seq.reshape((height, width), order="F")


@dataclass(frozen=True)
class NoiseSpec:
    """Zero-mean additive white Gaussian noise with a fixed seed."""

    sigma: float
    seed: int = 0
    mean: float = 0.0

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if self.mean != 0:
            raise ValueError("only zero-mean noise is supported")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")


def add_awgn(volume, spec: NoiseSpec, clip: bool = False) -> np.ndarray:
    """Return ``volume`` plus i.i.d. N(0, sigma^2) noise.

    Each frame draws from its own stream spawned from ``spec.seed``, so the
    output does not depend on how frames are scheduled. Values are left
    unclipped unless ``clip`` is set.
    """
    vol = np.asarray(volume, dtype=np.float64)
    if spec.sigma == 0:
        out = vol.copy()
    else:
        frames = vol.reshape((-1,) + vol.shape[-2:]) if vol.ndim >= 2 else vol[None]
        streams = np.random.SeedSequence(int(spec.seed)).spawn(frames.shape[0])
        noise = np.empty_like(frames)
        for k, ss in enumerate(streams):
            noise[k] = np.random.default_rng(ss).standard_normal(frames.shape[1:])
        out = vol + spec.sigma * noise.reshape(vol.shape)
    if clip:
        np.clip(out, 0.0, 1.0, out=out)
    return out


def smooth_image(size: int = 512, periods: float = 1.5) -> np.ndarray:
    """Smooth test image in [0.1, 0.9]: a 2-D sinusoid riding on a ramp."""
    y, x = np.mgrid[0:size, 0:size] / float(size)
    img = 0.5 + 0.2 * np.sin(2 * np.pi * periods * x) * np.cos(2 * np.pi * periods * y)
    img += 0.2 * (x + y - 1.0)
    return img


def synthetic_sequence(
    height: int = 128,
    width: int = 128,
    frames: int = 60,
    square: int = 16,
    speed: int = 1,
    brightness: float = 0.95,
) -> np.ndarray:
    """Static textured background with one bright square moving diagonally.

    All values lie in [0, 1].
    """
    y, x = np.mgrid[0:height, 0:width].astype(np.float64)
    bg = (
        0.45
        + 0.12 * np.sin(2 * np.pi * x / 37.0)
        + 0.10 * np.cos(2 * np.pi * y / 29.0)
        + 0.06 * np.sin(2 * np.pi * (x + y) / 53.0)
    )
    vol = np.repeat(bg[None], frames, axis=0)
    span_r = max(height - square, 1)
    span_c = max(width - square, 1)
    for t in range(frames):
        r0 = (4 + speed * t) % span_r
        c0 = (8 + speed * t) % span_c
        vol[t, r0:r0 + square, c0:c0 + square] = brightness
    return vol
