"""Attribute-edited image sequences: hyperplane sweeps and conditional ramps."""

from __future__ import annotations

import numpy as np

from .image import ImageBuffer
from .latent import Hyperplane, LatentCode, edit
from .losses import LabelVector
from .recovery import ConditionalGenerator, Generator

__all__ = ["sweep", "beautify_conditional", "advisory_range", "sweep_offsets"]

#: Past these offsets edits tend to leave the realistic regime (empirical).
_ADVISORY = {"hyperplane": 1.2, "conditional": 0.1}

_END_SLACK = 1e-9


def sweep_offsets(start: float, end: float, step: float) -> list[float]:
    """start, start+step, ... up to end (inclusive within 1e-9 slack)."""
    if step <= 0.0:
        raise ValueError(f"sweep step must be positive, got {step!r}")
    if end < start:
        raise ValueError(f"sweep end {end!r} must be >= start {start!r}")
    count = int(np.floor((end - start) / step + _END_SLACK)) + 1
    return [start + i * step for i in range(count)]


def sweep(z: LatentCode, h: Hyperplane, start: float, end: float, step: float,
          gen: Generator):
    """Walk a latent code along a hyperplane normal and render every stop.

    Returns a list of ``(alpha, edited_code, image)`` triples, one per offset
    from ``start`` to ``end`` in increments of ``step`` (end included when it
    lands within 1e-9). A zero offset renders the unedited code itself.
    """
    frames = []
    for alpha in sweep_offsets(start, end, step):
        zed = edit(z, h, alpha)
        frames.append((alpha, zed, gen.synthesize(zed)))
    return frames


def beautify_conditional(z: LatentCode, alpha_hat: float, beta, alphas_plus,
                         cgen: ConditionalGenerator) -> list[ImageBuffer]:
    """Re-render a recovered code at increasing beauty scores.

    The latent code and identity embedding stay fixed; every requested score
    must be at least the recovered baseline ``alpha_hat`` and lie in [0, 1].
    """
    alphas = [float(a) for a in alphas_plus]
    if not alphas:
        raise ValueError("alphas_plus must not be empty")
    for a in alphas:
        if a < alpha_hat - 1e-12:
            raise ValueError(
                f"conditional beautification only raises the score: "
                f"{a!r} < recovered baseline {alpha_hat!r}")
        if not 0.0 <= a <= 1.0:
            raise ValueError(f"beauty score {a!r} outside [0, 1]")
    beta = np.asarray(beta, dtype=np.float64)
    return [cgen.synthesize(z, LabelVector(a, beta)) for a in alphas]


def advisory_range(method: str) -> float:
    """Empirical realism threshold for an editing method.

    Hyperplane sweeps stay visually plausible up to offset 1.2; conditional
    beauty-score increments up to 0.1. Advisory only: callers warn beyond it.
    """
    try:
        return _ADVISORY[method]
    except KeyError:
        raise ValueError(
            f"unknown editing method {method!r}, expected one of {sorted(_ADVISORY)}"
        ) from None
