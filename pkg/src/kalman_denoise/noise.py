"""Noise variance estimation.

Two estimators feed the stationary variance matrices of the filter:

* a fast single-frame AWGN estimator that convolves with a 3x3 Laplacian-
  difference kernel and averages the absolute response;
* a per-pixel temporal sample variance over the whole sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .volume import as_frame, as_volume

# Difference of two Laplacian masks; zero-sum along every row and column, so
# constants and planar ramps vanish.
LAPLACIAN_KERNEL = np.array(
    [[1, -2, 1],
     [-2, 4, -2],
     [1, -2, 1]],
    dtype=np.int64,
)
LAPLACIAN_KERNEL.setflags(write=False)

VARIANCE_MODES = ("temporal", "laplacian-global")


def laplacian_response(frame) -> np.ndarray:
    """Kernel response over the valid interior, shape ``(H-2, W-2)``.

    The kernel is applied as written (correlation); it is symmetric under a
    180 degree flip so this equals convolution.
    """
    frame = as_frame(frame)
    windows = sliding_window_view(frame, (3, 3))
    return np.einsum("ijkl,kl->ij", windows, LAPLACIAN_KERNEL.astype(np.float64))


def estimate_sigma_laplacian(frame) -> float:
    """Estimate the AWGN standard deviation of a single frame.

    Parameters
    ----------
    frame : array_like, shape (H, W)
        Grayscale frame, at least 3x3.

    Returns
    -------
    float
        ``sqrt(pi/2) / (6 (H-2) (W-2)) * sum |I * N|`` over the valid interior.
    """
    frame = as_frame(frame)
    h, w = frame.shape
    total = math.fsum(np.abs(laplacian_response(frame)).ravel())
    return math.sqrt(math.pi / 2.0) * total / (6.0 * (h - 2) * (w - 2))


def estimate_variance_temporal(volume) -> np.ndarray:
    """Per-pixel sample variance (divisor T-1) of each temporal series."""
    vol = as_volume(volume, min_frames=2)
    # shifting by the first sample keeps constant series exactly zero
    return (vol - vol[0]).var(axis=0, ddof=1)


@dataclass(frozen=True)
class VarianceField:
    """Stationary per-pixel process (``q``) and noise (``r``) variances."""

    q: np.ndarray
    r: np.ndarray
    beta: float = 1.0

    def __post_init__(self):
        if self.q.shape != self.r.shape:
            raise ValueError("q and r must share a shape")
        for arr in (self.q, self.r):
            arr.setflags(write=False)


def build_variance_field(volume, beta: float = 1.0, mode: str = "temporal") -> VarianceField:
    """Build the stationary ``q = beta * r`` field for ``volume``.

    ``mode="temporal"`` uses the per-pixel temporal variance for ``r``;
    ``mode="laplacian-global"`` broadcasts the square of the frame-averaged
    Laplacian sigma estimate.
    """
    if not beta > 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    vol = as_volume(volume, min_frames=2)
    if mode == "temporal":
        r = estimate_variance_temporal(vol)
    elif mode == "laplacian-global":
        sigma = float(np.mean([estimate_sigma_laplacian(f) for f in vol]))
        r = np.full(vol.shape[1:], sigma * sigma)
    else:
        raise ValueError(f"unknown variance mode {mode!r}; expected one of {VARIANCE_MODES}")
    q = r.copy() if beta == 1 else beta * r
    return VarianceField(q=q, r=r, beta=float(beta))
