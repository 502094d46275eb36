"""Separable filtering primitives and their exact adjoints.

Every loss in :mod:`latentwalk.losses` ships an analytic gradient, so each
linear image operation here comes in a forward/adjoint pair:

* valid-mode correlation  <->  full-mode convolution,
* same-mode (zero padded) correlation  <->  same-mode correlation with the
  flipped kernel,
* 2x2 block-average pooling  <->  upsample-by-repeat / 4.

Kernels are 1-D and applied separably per axis; 2-D kernels appear only in
the 3x3 conv bank (losses) where the adjoint flips both axes.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

__all__ = [
    "gaussian_kernel", "binomial_kernel",
    "corr_valid", "corr_valid_adjoint",
    "corr_same", "corr_same_adjoint",
    "avgpool2", "avgpool2_adjoint",
    "corr2_same", "corr2_same_adjoint",
]


def gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian taps, centered, length ``size``."""
    x = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    k = np.exp(-(x ** 2) / (2.0 * sigma ** 2))
    return k / k.sum()


def binomial_kernel() -> np.ndarray:
    """The classic [1,4,6,4,1]/16 pyramid smoothing taps."""
    return np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0


def _corr1d_valid(a: np.ndarray, k: np.ndarray, axis: int) -> np.ndarray:
    return sliding_window_view(a, len(k), axis=axis) @ k


def corr_valid(img: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Separable valid-mode correlation over the first two axes."""
    return _corr1d_valid(_corr1d_valid(img, k, 0), k, 1)


def _pad_axis(a: np.ndarray, before: int, after: int, axis: int) -> np.ndarray:
    pad = [(0, 0)] * a.ndim
    pad[axis] = (before, after)
    return np.pad(a, pad)


def corr_valid_adjoint(grad: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Adjoint of :func:`corr_valid`: full-mode convolution with ``k``.

    Implemented as valid correlation of the zero-extended upstream with the
    flipped kernel, per axis.
    """
    m = len(k) - 1
    kf = k[::-1]
    out = _corr1d_valid(_pad_axis(grad, m, m, 0), kf, 0)
    return _corr1d_valid(_pad_axis(out, m, m, 1), kf, 1)


def _corr1d_same(a: np.ndarray, k: np.ndarray, axis: int) -> np.ndarray:
    # odd-length kernels only; zero padding keeps the adjoint a mirror call
    c = (len(k) - 1) // 2
    return _corr1d_valid(_pad_axis(a, c, c, axis), k, axis)


def corr_same(img: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Separable same-size zero-padded correlation (odd kernels)."""
    if len(k) % 2 != 1:
        raise ValueError("same-mode filtering needs an odd kernel length")
    return _corr1d_same(_corr1d_same(img, k, 0), k, 1)


def corr_same_adjoint(grad: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Adjoint of :func:`corr_same`: same-mode correlation with k reversed."""
    kf = k[::-1]
    return _corr1d_same(_corr1d_same(grad, kf, 0), kf, 1)


def avgpool2(img: np.ndarray) -> np.ndarray:
    """2x2 block-average downsample; odd trailing row/col are dropped."""
    h2, w2 = img.shape[0] // 2, img.shape[1] // 2
    v = img[: 2 * h2, : 2 * w2]
    return v.reshape(h2, 2, w2, 2, *v.shape[2:]).mean(axis=(1, 3))


def avgpool2_adjoint(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Scatter pooled gradients back onto an image of ``shape``."""
    out = np.zeros(shape, dtype=np.float64)
    h2, w2 = shape[0] // 2, shape[1] // 2
    up = np.repeat(np.repeat(grad, 2, axis=0), 2, axis=1) / 4.0
    out[: 2 * h2, : 2 * w2] = up
    return out


def corr2_same(img: np.ndarray, kernel2d: np.ndarray) -> np.ndarray:
    """Dense 2-D same-size zero-padded correlation (odd square kernels)."""
    kh, kw = kernel2d.shape
    if kh % 2 != 1 or kw % 2 != 1:
        raise ValueError("2-D same-mode correlation needs odd kernel sides")
    p = _pad_axis(_pad_axis(img, kh // 2, kh // 2, 0), kw // 2, kw // 2, 1)
    win = sliding_window_view(p, (kh, kw))
    return np.einsum("ijkl,kl->ij", win, kernel2d)


def corr2_same_adjoint(grad: np.ndarray, kernel2d: np.ndarray) -> np.ndarray:
    """Adjoint of :func:`corr2_same`: same correlation with the flipped kernel."""
    return corr2_same(grad, kernel2d[::-1, ::-1])
