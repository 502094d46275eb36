import numpy as np
import pytest

from latentwalk.filters import binomial_kernel, corr_same
from latentwalk.image import ImageBuffer


def rel_err(a, b):
    """Scale-aware max deviation between two gradient arrays."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-12)
    return float(np.max(np.abs(a - b)) / scale)


def fd_image_grad(fn, pixels, h=1e-5):
    """Central finite differences of a scalar image functional."""
    g = np.zeros_like(pixels)
    it = np.nditer(pixels, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        pp, pm = pixels.copy(), pixels.copy()
        pp[idx] += h
        pm[idx] -= h
        g[idx] = (fn(ImageBuffer(pp)) - fn(ImageBuffer(pm))) / (2.0 * h)
    return g


def fd_vector_grad(fn, vec, h=1e-5):
    g = np.zeros_like(vec)
    for i in range(vec.size):
        vp, vm = vec.copy(), vec.copy()
        vp[i] += h
        vm[i] -= h
        g[i] = (fn(vp) - fn(vm)) / (2.0 * h)
    return g


def smooth_image(size, rng, lo=0.15, hi=0.85):
    """A smooth random image away from the [0,1] edges (FD-perturbable)."""
    base = rng.uniform(0.0, 1.0, (size, size))
    for _ in range(3):
        base = corr_same(base, binomial_kernel())
    base = (base - base.min()) / (base.max() - base.min())
    return lo + (hi - lo) * base


def image_pair(size, rng, noise=0.08, channels=1):
    """A correlated (target, prediction-like) pair for gradient checks."""
    a = smooth_image(size, rng)
    b = np.clip(a + rng.normal(0.0, noise, a.shape), 0.05, 0.95)
    if channels == 1:
        return ImageBuffer(a[:, :, None]), ImageBuffer(b[:, :, None])
    stack_a = np.stack([np.clip(a * s + o, 0.0, 1.0) for s, o in
                        ((1.0, 0.0), (0.9, 0.05), (0.8, 0.1))], axis=-1)
    stack_b = np.stack([np.clip(b * s + o, 0.0, 1.0) for s, o in
                        ((1.0, 0.0), (0.9, 0.05), (0.8, 0.1))], axis=-1)
    return ImageBuffer(stack_a), ImageBuffer(stack_b)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
