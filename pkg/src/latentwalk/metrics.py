"""Evaluation metrics: Frechet feature distance, BRISQUE features, identity distance.

All three are built from first principles on numpy arrays. Feature
extraction for the Frechet distance is pluggable (any n x d FeatureSet will
do); BRISQUE implements the spatial-domain no-reference pipeline of MSCN
coefficients fitted with (asymmetric) generalized Gaussians; identity
distance is the embedding-space L2 between two images under any unit-norm
embedder.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .filters import avgpool2, corr_valid, gaussian_kernel
from .image import ImageBuffer
from .linalg import sym_matrix_sqrt

__all__ = [
    "FeatureSet", "GaussianStats", "Embedder",
    "gaussian_stats", "frechet_distance",
    "brisque_features", "ggd_fit", "aggd_fit", "brisque_score",
    "identity_distance",
]


class FeatureSet:
    """An immutable n x d matrix of feature vectors."""

    __slots__ = ("_rows",)

    def __init__(self, rows):
        arr = np.ascontiguousarray(np.asarray(rows, dtype=np.float64))
        if arr.ndim != 2:
            raise ValueError(f"feature set must be 2-D (n x d), got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"feature set must be non-empty, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("feature set entries must be finite")
        arr.flags.writeable = False
        self._rows = arr

    @property
    def rows(self) -> np.ndarray:
        return self._rows

    @property
    def count(self) -> int:
        return self._rows.shape[0]

    @property
    def dim(self) -> int:
        return self._rows.shape[1]

    def __repr__(self):
        return f"FeatureSet(n={self.count}, d={self.dim})"


@dataclass(frozen=True)
class GaussianStats:
    """Sufficient statistics (mean, covariance) of a feature cloud."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.ascontiguousarray(np.asarray(self.mean, dtype=np.float64))
        cov = np.ascontiguousarray(np.asarray(self.cov, dtype=np.float64))
        if mean.ndim != 1:
            raise ValueError("mean must be a vector")
        if cov.shape != (mean.size, mean.size):
            raise ValueError(f"cov shape {cov.shape} does not match mean dim {mean.size}")
        if float(np.max(np.abs(cov - cov.T), initial=0.0)) > 1e-9:
            raise ValueError("covariance must be symmetric to 1e-9")
        if np.any(np.diag(cov) < -1e-12):
            raise ValueError("covariance diagonal must be >= -1e-12")
        mean.flags.writeable = False
        cov.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.size


class Embedder:
    """Image -> unit-norm identity embedding."""

    def embed(self, img: ImageBuffer) -> np.ndarray:
        raise NotImplementedError


def gaussian_stats(f: FeatureSet) -> GaussianStats:
    """Sample mean and unbiased covariance (divisor n-1; n=1 gives zeros)."""
    rows = f.rows
    mean = rows.mean(axis=0)
    if f.count == 1:
        cov = np.zeros((f.dim, f.dim))
    else:
        centered = rows - mean
        cov = centered.T @ centered / (f.count - 1)
        cov = 0.5 * (cov + cov.T)
    return GaussianStats(mean, cov)


def frechet_distance(a: GaussianStats, b: GaussianStats) -> float:
    """Frechet distance between two Gaussians fitted to feature clouds.

    ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a S_b)^{1/2}), with the cross
    term in the stabilized symmetric form sqrt(sqrt(S_a) S_b sqrt(S_a)).
    The pair is evaluated in a canonical argument order so the result is
    bit-identical under argument swap; small negative round-off (>= -1e-6)
    clamps to zero.
    """
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    first, second = a, b
    key_a = a.mean.tobytes() + a.cov.tobytes()
    key_b = b.mean.tobytes() + b.cov.tobytes()
    if key_b < key_a:
        first, second = b, a
    mean_term = float(np.sum((first.mean - second.mean) ** 2))
    root_first = sym_matrix_sqrt(first.cov)
    cross = sym_matrix_sqrt(root_first @ second.cov @ root_first)
    value = mean_term + float(np.trace(first.cov) + np.trace(second.cov)
                              - 2.0 * np.trace(cross))
    if value < 0.0:
        if value < -1e-6:
            raise FloatingPointError(
                f"frechet distance came out {value:.3g}, beyond round-off tolerance")
        value = 0.0
    return value


# ---------------------------------------------------------------------------
# BRISQUE

_BRISQUE_WINDOW = 7
_BRISQUE_SIGMA = 7.0 / 6.0
_BRISQUE_C = 1.0 / 255.0
_SHAPE_GRID = np.arange(0.2, 10.0 + 1e-9, 0.001)


def _gamma_ratio(x: np.ndarray) -> np.ndarray:
    # Gamma(1/g) Gamma(3/g) / Gamma(2/g)^2 via log-gamma for stability
    return np.exp(gammaln(1.0 / x) + gammaln(3.0 / x) - 2.0 * gammaln(2.0 / x))


_GGD_RHO = _gamma_ratio(_SHAPE_GRID)          # rho(gamma) for the symmetric fit
_AGGD_RHO = 1.0 / _GGD_RHO                    # inverse ratio used by the asymmetric fit


def _local_stats(plane: np.ndarray):
    k = gaussian_kernel(_BRISQUE_WINDOW, _BRISQUE_SIGMA)
    half = _BRISQUE_WINDOW // 2
    padded = np.pad(plane, half, mode="edge")
    mu = corr_valid(padded, k)
    sq = corr_valid(padded * padded, k)
    sigma = np.sqrt(np.abs(sq - mu * mu))
    return mu, sigma


def _mscn(plane: np.ndarray) -> np.ndarray:
    mu, sigma = _local_stats(plane)
    return (plane - mu) / (sigma + _BRISQUE_C)


def ggd_fit(samples) -> tuple[float, float]:
    """Symmetric generalized-Gaussian moment fit: (shape, variance).

    Matches E[x^2] / E[|x|]^2 against the analytic ratio over a dense shape
    grid; degenerate all-zero input returns the flattest grid shape with
    variance zero.
    """
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValueError("cannot fit an empty sample")
    var = float(np.mean(x * x))
    mean_abs = float(np.mean(np.abs(x)))
    if mean_abs < 1e-12:
        return float(_SHAPE_GRID[-1]), 0.0
    rho = var / (mean_abs * mean_abs)
    idx = int(np.argmin(np.abs(_GGD_RHO - rho)))
    return float(_SHAPE_GRID[idx]), var


def aggd_fit(samples) -> tuple[float, float, float, float]:
    """Asymmetric generalized-Gaussian moment fit.

    Returns (shape, mean, left variance, right variance): negative and
    nonnegative halves get separate scales, the shape comes from the
    moment-ratio grid search, and the mean follows from the fitted scales.
    """
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValueError("cannot fit an empty sample")
    left = x[x < 0.0]
    right = x[x > 0.0]
    left_sq = float(np.mean(left * left)) if left.size else 0.0
    right_sq = float(np.mean(right * right)) if right.size else 0.0
    sigma_l = np.sqrt(left_sq)
    sigma_r = np.sqrt(right_sq)

    mean_sq = float(np.mean(x * x))
    mean_abs = float(np.mean(np.abs(x)))
    if mean_sq < 1e-24 or (sigma_l == 0.0 and sigma_r == 0.0):
        return float(_SHAPE_GRID[-1]), 0.0, 0.0, 0.0
    gamma_hat = sigma_l / sigma_r if sigma_r > 0.0 else np.inf
    r_hat = (mean_abs * mean_abs) / mean_sq
    if np.isinf(gamma_hat):
        big_r = r_hat  # all-negative sample: limit of the correction factor
    else:
        big_r = r_hat * (gamma_hat ** 3 + 1.0) * (gamma_hat + 1.0) / (gamma_hat ** 2 + 1.0) ** 2
    idx = int(np.argmin((_AGGD_RHO - big_r) ** 2))
    shape = float(_SHAPE_GRID[idx])

    const = np.exp(0.5 * (gammaln(1.0 / shape) - gammaln(3.0 / shape)))
    mean = (sigma_r - sigma_l) * const * np.exp(
        gammaln(2.0 / shape) - gammaln(1.0 / shape))
    return shape, float(mean), left_sq, right_sq


def _scale_features(mscn: np.ndarray) -> list[float]:
    shape, var = ggd_fit(mscn)
    feats = [shape, var]
    pairs = (
        mscn[:, :-1] * mscn[:, 1:],      # horizontal
        mscn[:-1, :] * mscn[1:, :],      # vertical
        mscn[:-1, :-1] * mscn[1:, 1:],   # main diagonal
        mscn[1:, :-1] * mscn[:-1, 1:],   # secondary diagonal
    )
    for p in pairs:
        feats.extend(aggd_fit(p))
    return feats


def brisque_features(img: ImageBuffer) -> np.ndarray:
    """36 BRISQUE features: 18 per scale at full and half resolution.

    The luminance plane is contrast-normalized into MSCN coefficients with
    7x7 Gaussian local statistics (sigma 7/6, C = 1/255); each scale yields a
    symmetric-GGD fit of the MSCN field (shape, variance) and asymmetric fits
    (shape, mean, left/right variance) of its four directional pairwise
    products. The second scale is the 2x half-size resample.
    """
    if min(img.height, img.width) < 32:
        raise ValueError(
            f"BRISQUE needs min side >= 32, got {img.height}x{img.width}")
    plane = img.gray()
    feats: list[float] = []
    for scale in range(2):
        feats.extend(_scale_features(_mscn(plane)))
        if scale == 0:
            plane = avgpool2(plane)
    return np.array(feats)


def brisque_score(features, model: dict) -> float:
    """Affine quality score w . f_scaled + b from a loaded model dict.

    The model carries per-feature min/max for [0, 1] rescaling plus weights
    and bias; constant features (min == max) rescale to zero.
    """
    f = np.asarray(features, dtype=np.float64).ravel()
    try:
        weights = np.asarray(model["weights"], dtype=np.float64)
        bias = float(model["bias"])
        fmin = np.asarray(model["feature_min"], dtype=np.float64)
        fmax = np.asarray(model["feature_max"], dtype=np.float64)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"invalid BRISQUE model: {exc}") from exc
    if not (weights.shape == fmin.shape == fmax.shape == f.shape):
        raise ValueError(
            f"BRISQUE model arrays must match the {f.size}-dim feature vector")
    span = fmax - fmin
    scaled = np.where(span > 0.0, (f - fmin) / np.where(span > 0.0, span, 1.0), 0.0)
    return float(weights @ scaled + bias)


def identity_distance(img_a: ImageBuffer, img_b: ImageBuffer, e: Embedder) -> float:
    """L2 distance between the identity embeddings of two images."""
    va = np.asarray(e.embed(img_a), dtype=np.float64)
    vb = np.asarray(e.embed(img_b), dtype=np.float64)
    if va.shape != vb.shape:
        raise ValueError(f"embedder returned mismatched shapes {va.shape} vs {vb.shape}")
    return float(np.linalg.norm(va - vb))
