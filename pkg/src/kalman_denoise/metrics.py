"""Quality metrics: MSE, PSNR, and FFT autocorrelation of residuals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError, NumericError, ShapeError

PSNR_VARIANTS = ("paper-literal", "standard")


def _pair(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ShapeError(f"shape mismatch: {x.shape} vs {y.shape}")
    return x, y


def mse(x, y) -> float:
    x, y = _pair(x, y)
    return float(np.mean((x - y) ** 2))


def peak(x, y) -> float:
    """The ``D`` term of PSNR: the larger of the two maxima."""
    x, y = _pair(x, y)
    return float(max(x.max(), y.max()))


def psnr_from_mse(err: float, d: float, variant: str = "standard") -> float:
    """PSNR in dB from a precomputed MSE and peak ``d``.

    ``standard`` is ``10 log10(d^2 / mse)``. ``paper-literal`` is
    ``10 log10(d / mse^2)``, which is not the conventional definition and gives
    roughly twice the dB figure at typical noise levels. ``mse == 0`` returns
    ``math.inf``.
    """
    if variant not in PSNR_VARIANTS:
        raise ValueError(f"unknown PSNR variant {variant!r}")
    if err == 0:
        return math.inf
    if variant == "standard":
        return 10.0 * math.log10(d * d / err)
    return 10.0 * math.log10(d / (err * err))


def psnr(x, y, variant: str = "standard") -> float:
    return psnr_from_mse(mse(x, y), peak(x, y), variant)


@dataclass
class MetricsReport:
    """Per-frame and averaged MSE/PSNR for a pair of volumes.

    ``identical`` flags frames whose MSE is exactly zero (PSNR = inf).
    """

    per_frame_mse: np.ndarray
    per_frame_psnr: dict[str, np.ndarray]
    identical: np.ndarray = field(repr=False)

    @property
    def avg_mse(self) -> float:
        return float(np.mean(self.per_frame_mse))

    def avg_psnr(self, variant: str = "standard") -> float:
        return float(np.mean(self.per_frame_psnr[variant]))


def evaluate(reference, test) -> MetricsReport:
    """Frame-by-frame comparison of two ``(T, H, W)`` volumes.

    Averages are arithmetic means of the per-frame values.
    """
    ref, tst = _pair(reference, test)
    if ref.ndim != 3:
        raise ShapeError("evaluate expects (T, H, W) volumes")
    errs = np.array([mse(a, b) for a, b in zip(ref, tst)])
    peaks = np.array([peak(a, b) for a, b in zip(ref, tst)])
    per_psnr = {
        v: np.array([psnr_from_mse(e, d, v) for e, d in zip(errs, peaks)])
        for v in PSNR_VARIANTS
    }
    return MetricsReport(per_frame_mse=errs, per_frame_psnr=per_psnr, identical=errs == 0)


@dataclass(frozen=True)
class AcfSurface:
    """Circular autocorrelation with zero lag at index ``(0, 0)``."""

    values: np.ndarray

    @property
    def origin_peak(self) -> float:
        return float(self.values[0, 0])

    def centered(self) -> np.ndarray:
        """Values with zero lag moved to ``(H // 2, W // 2)``."""
        return np.fft.fftshift(self.values)


def acf_2d(frame) -> AcfSurface:
    """Wiener-Khinchin autocorrelation ``IFFT(|FFT(X)|^2) / (H W)``.

    With this normalization the zero-lag value is the mean power of the frame.
    """
    x = np.asarray(frame, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError("acf_2d expects a 2-D frame")
    f = np.fft.fft2(x)
    r = np.fft.ifft2(f * np.conj(f)) / x.size
    scale = max(1.0, float(np.abs(r.real).max()))
    if np.abs(r.imag).max() > 1e-9 * scale:
        raise NumericError("autocorrelation has a non-negligible imaginary part")
    return AcfSurface(np.ascontiguousarray(r.real))


@dataclass(frozen=True)
class WhitenessResult:
    ratio: float
    passed: bool
    origin: float
    acf: AcfSurface = field(repr=False)


def whiteness_check(residual, threshold: float = 0.1) -> WhitenessResult:
    """Test whether a residual looks like white noise.

    The residual is mean-subtracted, then ``ratio`` is the largest absolute
    off-origin ACF value over the origin value. For white noise the origin
    estimates the noise variance and the ratio is small.
    """
    x = np.asarray(residual, dtype=np.float64)
    if x.size == 0 or np.ptp(x) == 0:
        raise DegenerateInputError("residual has zero power after mean subtraction")
    acf = acf_2d(x - x.mean())
    origin = acf.origin_peak
    if origin <= 0:
        raise DegenerateInputError("residual has zero power after mean subtraction")
    off = acf.values.copy()
    off[0, 0] = 0.0
    ratio = float(np.abs(off).max() / origin)
    return WhitenessResult(ratio=ratio, passed=ratio < threshold, origin=origin, acf=acf)
