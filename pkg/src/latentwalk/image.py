"""Image value type shared by losses, metrics and generators."""

from __future__ import annotations

import numpy as np

__all__ = ["ImageBuffer"]


class ImageBuffer:
    """An immutable H x W x C raster of reals in [0, 1].

    Channels must be 1 (grayscale) or 3 (RGB). The pixel array is stored
    row-major as float64 and write-protected after construction, so buffers
    can be shared freely across threads.
    """

    __slots__ = ("_pixels",)

    def __init__(self, pixels):
        arr = np.asarray(pixels, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3:
            raise ValueError(f"image must be HxW or HxWxC, got shape {arr.shape}")
        h, w, c = arr.shape
        if h < 1 or w < 1:
            raise ValueError(f"image sides must be >= 1, got {h}x{w}")
        if c not in (1, 3):
            raise ValueError(f"channels must be 1 or 3, got {c}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("image pixels must be finite")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError(
                f"image pixels must lie in [0, 1], got range "
                f"[{arr.min():.6g}, {arr.max():.6g}]"
            )
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        self._pixels = arr

    @property
    def pixels(self) -> np.ndarray:
        """Read-only (H, W, C) float64 array."""
        return self._pixels

    @property
    def height(self) -> int:
        return self._pixels.shape[0]

    @property
    def width(self) -> int:
        return self._pixels.shape[1]

    @property
    def channels(self) -> int:
        return self._pixels.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self._pixels.shape

    def gray(self) -> np.ndarray:
        """(H, W) luminance plane; RGB collapses with 0.299/0.587/0.114."""
        if self.channels == 1:
            return self._pixels[:, :, 0]
        return (
            0.299 * self._pixels[:, :, 0]
            + 0.587 * self._pixels[:, :, 1]
            + 0.114 * self._pixels[:, :, 2]
        )

    def mean(self) -> float:
        return float(self._pixels.mean())

    def __eq__(self, other) -> bool:
        if not isinstance(other, ImageBuffer):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self._pixels, other._pixels)

    def __hash__(self):
        return hash((self.shape, self._pixels.tobytes()))

    def __repr__(self) -> str:
        return f"ImageBuffer({self.height}x{self.width}x{self.channels})"


def same_shape(a: ImageBuffer, b: ImageBuffer, what: str = "images") -> None:
    if a.shape != b.shape:
        raise ValueError(f"{what} have mismatched shapes {a.shape} vs {b.shape}")
