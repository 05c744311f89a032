"""Per-pixel Kalman denoising of grayscale video volumes corrupted by AWGN."""

from .errors import (
    DegenerateInputError,
    FormatError,
    InsufficientDataError,
    KalmanDenoiseError,
    NumericError,
    ShapeError,
)
from .formats import load_volume, save_volume
from .kalman import FilterState, KalmanConfig, TraceRecord, denoise, initialize, step
from .metrics import AcfSurface, MetricsReport, acf_2d, evaluate, mse, psnr, whiteness_check
from .noise import (
    LAPLACIAN_KERNEL,
    VarianceField,
    build_variance_field,
    estimate_sigma_laplacian,
    estimate_variance_temporal,
)
from .prediction import MedianConfig, median_filter_1d, predict_frame
from .volume import NoiseSpec, add_awgn, vec_flatten, vec_unflatten

__version__ = "0.1.0"
