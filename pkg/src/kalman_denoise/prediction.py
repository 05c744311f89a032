"""Fast running median used as the state predictor.

Each frame is vectorized column-wise, filtered with a 1-D running median
(replicate boundaries) and reshaped back. Note that the 1-D pass couples the
bottom of one column to the top of the next; this is intentional.
"""

from __future__ import annotations

from bisect import bisect_left, insort
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .volume import as_frame, vec_flatten, vec_unflatten


@dataclass(frozen=True)
class MedianConfig:
    window: int = 3
    boundary: str = "replicate"

    def __post_init__(self):
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError(f"window must be odd and >= 3, got {self.window}")
        if self.boundary != "replicate":
            raise ValueError(f"unsupported boundary policy {self.boundary!r}")


def _median3(padded: np.ndarray) -> np.ndarray:
    # median(a, b, c) = max(min(a, b), min(max(a, b), c)), vectorized over k
    a, b, c = padded[:-2], padded[1:-1], padded[2:]
    return np.maximum(np.minimum(a, b), np.minimum(np.maximum(a, b), c))


def _running_median(padded: np.ndarray, window: int) -> np.ndarray:
    """Sorted-window running median: one bisect removal and one insort per step."""
    half = window // 2
    values = padded.tolist()
    d = deque(values[:window])
    s = sorted(d)
    out = [s[half]]
    for item in values[window:]:
        old = d.popleft()
        d.append(item)
        del s[bisect_left(s, old)]
        insort(s, item)
        out.append(s[half])
    return np.asarray(out, dtype=padded.dtype)


def median_filter_1d(seq, cfg: MedianConfig = MedianConfig()) -> np.ndarray:
    """Running median of ``seq`` with a centered odd window.

    Edges are extended by replicating the first and last samples, so the
    output has the same length as the input and constants are preserved.
    """
    seq = np.asarray(seq, dtype=np.float64)
    if seq.ndim != 1 or seq.size == 0:
        raise ShapeError("median filter needs a non-empty 1-D sequence")
    half = cfg.window // 2
    padded = np.pad(seq, half, mode="edge")
    if cfg.window == 3:
        return _median3(padded)
    return _running_median(padded, cfg.window)


def predict_frame(frame, cfg: MedianConfig = MedianConfig()) -> np.ndarray:
    """Predicted state for a frame: column-wise vectorize, median, reshape."""
    frame = as_frame(frame)
    h, w = frame.shape
    return vec_unflatten(median_filter_1d(vec_flatten(frame), cfg), w, h)
