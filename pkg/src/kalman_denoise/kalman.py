"""Frame-based Kalman filter with one independent scalar filter per pixel.

State model (A = H = identity)::

    x[t+1] = x[t] + w[t],   w ~ N(0, q)
    y[t]   = x[t] + n[t],   n ~ N(0, r)

with ``q`` and ``r`` stationary per-pixel fields, ``q = beta * r``. Every
product below is elementwise.

At each time ``t`` the filter predicts from the median-filtered frame
``t+1``, takes the ``t-1`` term as its measurement and estimates frame ``t``::

    p_pred = p_est + q
    k      = p_pred / (p_pred + q)
    x_est  = x_pred + k * (x_meas - x_pred)
    p_est  = (1 - k) * p_pred

Indices past either end of the sequence are clamped.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InsufficientDataError, NumericError
from .metrics import mse, peak, psnr_from_mse
from .noise import VARIANCE_MODES, VarianceField, build_variance_field
from .prediction import MedianConfig, predict_frame
from .volume import as_volume

MEASUREMENT_SOURCES = ("estimate", "input")


@dataclass(frozen=True)
class KalmanConfig:
    """Filter settings.

    ``measurement`` selects what the ``t-1`` term refers to: ``"estimate"``
    feeds back the filter's own output for frame ``t-1``; ``"input"`` uses the
    raw frame ``t-1``.
    """

    beta: float = 1.0
    median: MedianConfig = field(default_factory=MedianConfig)
    variance_mode: str = "temporal"
    measurement: str = "estimate"

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if self.variance_mode not in VARIANCE_MODES:
            raise ValueError(f"unknown variance mode {self.variance_mode!r}")
        if self.measurement not in MEASUREMENT_SOURCES:
            raise ValueError(f"unknown measurement source {self.measurement!r}")


@dataclass(frozen=True)
class FilterState:
    x_pred: np.ndarray
    p_pred: np.ndarray
    p_est: np.ndarray
    gain: np.ndarray
    t: int
    x_est: np.ndarray | None = None


@dataclass(frozen=True)
class TraceRecord:
    """Per-frame diagnostics; ``t`` is 0-based."""

    t: int
    mean_gain: float
    mean_p: float
    mse: float
    psnr_paper: float
    psnr_standard: float


def _gain(p_pred: np.ndarray, q: np.ndarray) -> np.ndarray:
    denom = p_pred + q
    out = np.zeros_like(p_pred)
    np.divide(p_pred, denom, out=out, where=denom > 0)
    return out


def initialize(volume, cfg: KalmanConfig = KalmanConfig()) -> tuple[FilterState, VarianceField]:
    """Initial prediction, variance field, error variance and gain.

    The initial error variance is the squared difference between the first
    frame and its median prediction; where ``p_pred + q == 0`` the gain is 0.
    """
    vol = as_volume(volume, min_frames=3)
    vfield = build_variance_field(vol, beta=cfg.beta, mode=cfg.variance_mode)
    x_pred = predict_frame(vol[0], cfg.median)
    p_est = (x_pred - vol[0]) ** 2
    p_pred = p_est + vfield.q
    gain = _gain(p_pred, vfield.q)
    return FilterState(x_pred=x_pred, p_pred=p_pred, p_est=p_est, gain=gain, t=-1), vfield


def step(
    state: FilterState,
    volume,
    vfield: VarianceField,
    t: int,
    cfg: KalmanConfig = KalmanConfig(),
    reference=None,
) -> tuple[FilterState, np.ndarray, TraceRecord]:
    """Advance the filter to frame ``t`` (0-based).

    Returns the new state, the estimate of frame ``t`` and its trace record.
    Trace MSE/PSNR compare the estimate against ``reference[t]`` when a clean
    reference volume is given, otherwise against the input frame ``t``.
    """
    vol = np.asarray(volume, dtype=np.float64)
    n = vol.shape[0]
    if not 0 <= t < n:
        raise IndexError(f"frame index {t} out of range for {n} frames")
    tp = min(t + 1, n - 1)
    tm = max(t - 1, 0)

    x_pred = predict_frame(vol[tp], cfg.median)
    if cfg.measurement == "estimate" and state.x_est is not None and t > 0:
        x_meas = state.x_est
    else:
        x_meas = vol[tm]

    p_pred = state.p_est + vfield.q
    gain = _gain(p_pred, vfield.q)
    x_est = x_pred + gain * (x_meas - x_pred)
    p_est = (1.0 - gain) * p_pred

    target = vol[t] if reference is None else np.asarray(reference, dtype=np.float64)[t]
    err = mse(target, x_est)
    d = peak(target, x_est)
    record = TraceRecord(
        t=t,
        mean_gain=float(gain.mean()),
        mean_p=float(p_est.mean()),
        mse=err,
        psnr_paper=psnr_from_mse(err, d, "paper-literal"),
        psnr_standard=psnr_from_mse(err, d, "standard"),
    )
    new_state = FilterState(x_pred=x_pred, p_pred=p_pred, p_est=p_est, gain=gain, t=t, x_est=x_est)
    return new_state, x_est, record


def denoise(volume, cfg: KalmanConfig = KalmanConfig(), reference=None):
    """Filter a whole ``(T, H, W)`` volume.

    Returns
    -------
    estimate : ndarray, shape (T, H, W)
    trace : list of TraceRecord, one per frame
    """
    vol = as_volume(volume, min_frames=3)
    if reference is not None and np.shape(reference) != vol.shape:
        raise ValueError("reference must have the same shape as the volume")
    state, vfield = initialize(vol, cfg)
    out = np.empty_like(vol)
    trace = []
    for t in range(vol.shape[0]):
        state, out[t], rec = step(state, vol, vfield, t, cfg, reference)
        trace.append(rec)
    if not np.all(np.isfinite(out)):
        raise NumericError("non-finite values in filter output")
    return out, trace
