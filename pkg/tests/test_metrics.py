import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from kalman_denoise.errors import DegenerateInputError, ShapeError
from kalman_denoise.metrics import (
    acf_2d,
    evaluate,
    mse,
    peak,
    psnr,
    psnr_from_mse,
    whiteness_check,
)
from kalman_denoise.volume import NoiseSpec, add_awgn


def brute_force_acf(x):
    h, w = x.shape
    out = np.zeros_like(x)
    for u in range(h):
        for v in range(w):
            s = 0.0
            for i in range(h):
                for j in range(w):
                    s += x[i, j] * x[(i + u) % h, (j + v) % w]
            out[u, v] = s / (h * w)
    return out


def test_mse_examples():
    x = np.zeros((2, 2))
    assert mse(x, x) == 0
    assert mse(np.ones((3, 3)), np.zeros((3, 3))) == 1
    y = np.array([[0.1, 0.1], [0.3, 0.1]])
    assert mse(x, y) == pytest.approx(0.03, rel=1e-12)


def test_mse_shape_mismatch():
    with pytest.raises(ShapeError):
        mse(np.zeros((3, 3)), np.zeros((3, 4)))


@settings(max_examples=50, deadline=None)
@given(
    arrays(np.float64, (4, 5), elements=st.floats(-10, 10).map(lambda v: round(v, 6))),
    arrays(np.float64, (4, 5), elements=st.floats(-10, 10).map(lambda v: round(v, 6))),
)
def test_mse_symmetric_nonnegative(x, y):
    assert mse(x, y) == mse(y, x)
    assert mse(x, y) >= 0
    assert (mse(x, y) == 0) == np.array_equal(x, y)


def test_psnr_variants():
    assert psnr_from_mse(0.01, 1.0, "paper-literal") == pytest.approx(40.0)
    assert psnr_from_mse(0.01, 1.0, "standard") == pytest.approx(20.0)
    with pytest.raises(ValueError):
        psnr_from_mse(0.01, 1.0, "bogus")


def test_psnr_uses_larger_maximum():
    x = np.zeros((3, 3))
    x[0, 0] = 0.5
    y = np.zeros((3, 3))
    y[1, 1] = 1.0
    assert peak(x, y) == 1.0
    err = mse(x, y)
    assert psnr(x, y) == pytest.approx(10 * math.log10(1.0 / err))


def test_psnr_identical_is_infinite():
    x = np.random.default_rng(1).random((4, 4))
    assert psnr(x, x) == math.inf
    assert psnr(x, x, "paper-literal") == math.inf


@pytest.mark.parametrize("variant", ["standard", "paper-literal"])
def test_psnr_strictly_decreasing_in_mse(variant):
    grid = np.geomspace(1e-6, 0.5, 50)
    values = [psnr_from_mse(e, 1.0, variant) for e in grid]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_evaluate_averages(rng):
    ref = rng.random((5, 6, 6))
    tst = ref + rng.normal(0, 0.05, ref.shape)
    rep = evaluate(ref, tst)
    assert rep.avg_mse == pytest.approx(np.mean([mse(a, b) for a, b in zip(ref, tst)]))
    assert rep.avg_psnr() == pytest.approx(np.mean([psnr(a, b) for a, b in zip(ref, tst)]))
    assert rep.avg_psnr("paper-literal") == pytest.approx(
        np.mean([psnr(a, b, "paper-literal") for a, b in zip(ref, tst)])
    )
    assert not rep.identical.any()


def test_evaluate_identical(rng):
    ref = rng.random((3, 4, 4))
    rep = evaluate(ref, ref)
    assert rep.avg_mse == 0
    assert rep.identical.all()
    assert rep.avg_psnr() == math.inf


def test_acf_impulse():
    x = np.zeros((6, 5))
    x[2, 3] = 1.0
    r = acf_2d(x).values
    expected = np.zeros_like(x)
    expected[0, 0] = 1 / 30
    np.testing.assert_allclose(r, expected, atol=1e-12)


def test_acf_constant_frame():
    x = np.full((4, 4), 0.3)
    np.testing.assert_allclose(brute_force_acf(x), 0.09, rtol=1e-12)
    np.testing.assert_allclose(acf_2d(x).values, 0.09, rtol=1e-12)


def test_acf_random_8x8(rng):
    x = rng.random((8, 8))
    np.testing.assert_allclose(acf_2d(x).values, brute_force_acf(x), atol=1e-9)


def test_acf_centered_layout(rng):
    x = rng.random((6, 7))
    acf = acf_2d(x)
    c = acf.centered()
    assert c[3, 3] == acf.origin_peak
    assert acf.origin_peak >= acf.values.max()


def test_parseval_normalization(rng):
    x = rng.normal(size=(12, 10))
    n = x.size
    psd = np.abs(np.fft.fft2(x)) ** 2
    # zero lag = mean power = sum(PSD) / n^2
    assert acf_2d(x).origin_peak == pytest.approx(np.mean(x**2), rel=1e-12)
    assert np.mean(x**2) == pytest.approx(psd.sum() / n**2, rel=1e-12)


def test_whiteness_of_awgn():
    noise = add_awgn(np.zeros((256, 256)), NoiseSpec(0.06, seed=4))
    res = whiteness_check(noise)
    assert res.origin == pytest.approx(0.0036, rel=0.10)
    assert res.ratio < 0.05
    assert res.passed


def test_whiteness_constant_residual():
    with pytest.raises(DegenerateInputError):
        whiteness_check(np.full((16, 16), 0.2))


def test_whiteness_smooth_gradient_fails():
    y, x = np.mgrid[0:16, 0:16] / 16.0
    g = x + y
    direct = brute_force_acf(g - g.mean())
    off = np.abs(direct).ravel()[1:].max()
    res = whiteness_check(g)
    assert res.ratio == pytest.approx(off / direct[0, 0], rel=1e-9)
    assert res.ratio > 0.8
    assert not res.passed


def test_whiteness_threshold_configurable():
    noise = add_awgn(np.zeros((64, 64)), NoiseSpec(0.1, seed=0))
    assert not whiteness_check(noise, threshold=1e-6).passed
