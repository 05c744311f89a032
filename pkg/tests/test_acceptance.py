"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line that is printed in the pytest terminal
summary. Run directly with ``python tests/test_acceptance.py`` for a plain
report.
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from kalman_denoise.formats import load_volume, save_volume
from kalman_denoise.kalman import denoise
from kalman_denoise.metrics import acf_2d, evaluate, whiteness_check
from kalman_denoise.noise import estimate_sigma_laplacian
from kalman_denoise.prediction import MedianConfig, median_filter_1d
from kalman_denoise.volume import NoiseSpec, add_awgn, smooth_image, synthetic_sequence

from oracles import naive_median, naive_predict, sample_variance, scalar_kalman

GOLDEN = (math.sqrt(5) - 1) / 2
TABLE_SIGMAS = (0.03, 0.15, 0.21, 0.25, 0.31)


def record(name, ok, detail):
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def sigma06_run():
    clean = synthetic_sequence(128, 128, 60)
    noisy = add_awgn(clean, NoiseSpec(0.06, seed=2024))
    t0 = time.perf_counter()
    out, trace = denoise(noisy)
    elapsed = time.perf_counter() - t0
    return clean, noisy, out, trace, elapsed


def test_c1_noise_estimator_rmse():
    t0 = time.perf_counter()
    img = smooth_image(512)
    sigmas = np.sqrt(np.linspace(0.001, 0.1, 20))
    est = np.array([
        estimate_sigma_laplacian(add_awgn(img, NoiseSpec(s, seed=100 + k)))
        for k, s in enumerate(sigmas)
    ])
    rmse = float(np.sqrt(np.mean((est - sigmas) ** 2)))
    elapsed = time.perf_counter() - t0
    record(
        "C1 noise-estimator RMSE",
        rmse <= 0.005 and elapsed < 5.0,
        f"rmse={rmse:.5f} (<= 0.005), {elapsed:.2f}s (< 5s)",
    )


def test_c2_steady_state_gain():
    t0 = time.perf_counter()
    series = (np.arange(20) % 2).astype(float)
    vol = np.broadcast_to(series[:, None, None], (20, 16, 16)).copy()
    q = sample_variance(series.tolist())
    _, trace = denoise(vol)
    elapsed = time.perf_counter() - t0
    gains = np.array([r.mean_gain for r in trace])
    ps = np.array([r.mean_p for r in trace])
    # frame 10 is index 9
    gain_err = abs(gains[9] - GOLDEN)
    p_err = abs(ps[9] - q * GOLDEN)
    flat = float(np.abs(np.diff(gains[9:])).max())
    ok = gain_err < 1e-3 and p_err < 1e-3 and flat < 1e-6 and elapsed < 1.0
    record(
        "C2 steady-state gain",
        ok,
        f"|K10-0.618034|={gain_err:.2e}, |P10-q*0.618|={p_err:.2e}, max|dK| after={flat:.1e}, {elapsed:.3f}s",
    )


def test_c3_scalar_oracle_equivalence():
    t0 = time.perf_counter()
    vol = np.random.default_rng(31337).random((20, 4, 4))
    out, _ = denoise(vol)
    preds = [naive_predict(vol[k].tolist()) for k in range(20)]
    worst = 0.0
    for i in range(4):
        for j in range(4):
            y = vol[:, i, j].tolist()
            pp = [preds[k][i][j] for k in range(20)]
            ref, _, _ = scalar_kalman(y, pp, sample_variance(y), (pp[0] - y[0]) ** 2)
            worst = max(worst, float(np.abs(out[:, i, j] - ref).max()))
    elapsed = time.perf_counter() - t0
    record("C3 scalar-oracle equivalence", worst <= 1e-12 and elapsed < 1.0,
           f"max |diff|={worst:.1e} (<= 1e-12), {elapsed:.3f}s")


def test_c4_denoising_gain(sigma06_run):
    clean, noisy, out, _, elapsed = sigma06_run
    noisy_psnr = evaluate(clean, noisy).avg_psnr("standard")
    filt_psnr = evaluate(clean, out).avg_psnr("standard")
    gain = filt_psnr - noisy_psnr
    record(
        "C4 denoising gain",
        gain >= 4.0 and elapsed < 30.0,
        f"noisy {noisy_psnr:.2f} dB -> filtered {filt_psnr:.2f} dB, gain {gain:.2f} dB (>= 4), {elapsed:.2f}s",
    )


def test_c5_monotone_degradation():
    clean = synthetic_sequence(128, 128, 60)
    noisy_p, filt_p = [], []
    for k, s in enumerate(TABLE_SIGMAS):
        noisy = add_awgn(clean, NoiseSpec(s, seed=500 + k))
        out, _ = denoise(noisy)
        noisy_p.append(evaluate(clean, noisy).avg_psnr("standard"))
        filt_p.append(evaluate(clean, out).avg_psnr("standard"))
    monotone = all(a > b for a, b in zip(filt_p, filt_p[1:]))
    improved = all(f > n for f, n in zip(filt_p, noisy_p))
    table = ", ".join(f"{s}:{n:.2f}/{f:.2f}" for s, n, f in zip(TABLE_SIGMAS, noisy_p, filt_p))
    record("C5 monotone degradation", monotone and improved, table)


def test_c6_residual_whiteness(sigma06_run):
    _, noisy, out, _, _ = sigma06_run
    t = noisy.shape[0] // 2
    res = whiteness_check(noisy[t] - out[t])
    rel = res.origin / 0.06**2
    record(
        "C6 residual whiteness",
        res.ratio < 0.1 and abs(rel - 1) <= 0.25,
        f"frame {t + 1}: ratio={res.ratio:.3f} (< 0.1), origin={res.origin:.5f} = {rel:.3f} sigma^2 (+-25%)",
    )


def test_c7_median_oracle():
    rng = np.random.default_rng(7)
    mismatches = 0
    for n in range(1000):
        length = int(rng.integers(1, 501))
        window = 3 if n % 2 == 0 else int(rng.choice([5, 7, 9]))
        seq = rng.normal(size=length)
        if n % 3 == 0:
            seq = np.round(seq, 1)  # force ties
        fast = median_filter_1d(seq, MedianConfig(window=window))
        if not np.array_equal(fast, naive_median(seq.tolist(), window)):
            mismatches += 1
    record("C7 median-filter oracle", mismatches == 0, f"{mismatches} mismatches over 1000 sequences")


def brute_acf(x):
    h, w = x.shape
    out = np.empty_like(x)
    for u in range(h):
        for v in range(w):
            out[u, v] = sum(
                x[i, j] * x[(i + u) % h, (j + v) % w] for i in range(h) for j in range(w)
            ) / (h * w)
    return out


def test_c8_acf_oracle():
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(100):
        h, w = (int(v) for v in rng.integers(1, 9, size=2))
        x = rng.normal(size=(h, w))
        worst = max(worst, float(np.abs(acf_2d(x).values - brute_acf(x)).max()))
    record("C8 ACF oracle", worst <= 1e-9, f"max |diff|={worst:.1e} (<= 1e-9) over 100 frames")


def test_c9_format_roundtrips(tmp_path):
    rng = np.random.default_rng(9)
    vol = rng.random((5, 17, 23)).astype(np.float32).astype(np.float64)
    save_volume(vol, tmp_path / "v.kvol")
    kvol_exact = load_volume(tmp_path / "v.kvol").tobytes() == vol.tobytes()
    errs = {}
    for maxval in (255, 65535):
        save_volume(vol, tmp_path / f"p{maxval}", "pgm-dir", maxval=maxval)
        back = load_volume(tmp_path / f"p{maxval}", "pgm-dir")
        errs[maxval] = float(np.abs(back - vol).max()) * 2 * maxval
    pgm_ok = all(e <= 1 + 1e-9 for e in errs.values())
    record(
        "C9 format round-trips",
        kvol_exact and pgm_ok,
        f"kvol bit-exact={kvol_exact}, PGM max err x 2*maxval: "
        + ", ".join(f"{m}:{e:.3f}" for m, e in errs.items()),
    )


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
