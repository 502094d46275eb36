"""Latent codes, attribute hyperplanes and the projection/edit algebra.

A trained generator maps a latent vector to an image. For a binary (or
thresholded-scalar) attribute there is, empirically, a hyperplane in latent
space separating the attribute's two sides; the signed projection of a code
onto the plane's unit normal acts as an editing "distance", and adding a
multiple of the normal moves the code across the boundary while leaving the
orthogonal complement untouched.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "LatentSpace", "LatentCode", "Hyperplane", "TrainStats", "EditStep",
    "distance", "edit", "classify",
]

_SPACES = ("Z", "W", "LAYERED")


def _frozen(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class LatentSpace:
    """Tag naming which latent space a code lives in.

    ``Z`` is the generator input prior, ``W`` an intermediate mapped space,
    ``LAYERED`` a per-layer stack (dim must divide evenly into ``layers``).
    """

    name: str = "Z"
    layers: int | None = None

    def __post_init__(self):
        if self.name not in _SPACES:
            raise ValueError(f"unknown latent space {self.name!r}, expected one of {_SPACES}")
        if self.name == "LAYERED":
            if self.layers is None or self.layers < 1:
                raise ValueError("LAYERED space needs layers >= 1")
        elif self.layers is not None:
            raise ValueError(f"space {self.name} takes no layer count")


class LatentCode:
    """An immutable point in a generator's latent space."""

    __slots__ = ("_values", "_space", "_meta")

    def __init__(self, values, space: LatentSpace | str = "Z", meta: dict | None = None):
        if isinstance(space, str):
            space = LatentSpace(space)
        arr = _frozen(values)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError(f"latent values must be a non-empty vector, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("latent values must be finite")
        if space.name == "LAYERED" and arr.size % space.layers != 0:
            raise ValueError(
                f"LAYERED latent dim {arr.size} is not divisible by layer count {space.layers}"
            )
        self._values = arr
        self._space = space
        self._meta = dict(meta) if meta else {}

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def dim(self) -> int:
        return self._values.size

    @property
    def space(self) -> LatentSpace:
        return self._space

    @property
    def meta(self) -> dict:
        return dict(self._meta)

    def with_values(self, values) -> "LatentCode":
        """Same space/meta, new coordinates."""
        return LatentCode(values, self._space, self._meta)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LatentCode):
            return NotImplemented
        return (
            self._space == other._space
            and np.array_equal(self._values, other._values)
            and self._meta == other._meta
        )

    def __repr__(self) -> str:
        return f"LatentCode(dim={self.dim}, space={self._space.name})"


@dataclass(frozen=True)
class TrainStats:
    """Accuracy record attached to a trained hyperplane."""

    val_accuracy: float | None = None
    rem_accuracy: float | None = None
    train_accuracy: float | None = None


class Hyperplane:
    """A unit normal plus bias separating one attribute in latent space.

    The normal must be unit length to within 1e-9; the bias participates in
    classification only (editing distances are pure projections).
    """

    __slots__ = ("_normal", "_bias", "_attribute", "_train_stats")

    def __init__(self, normal, bias: float = 0.0, attribute: str = "",
                 train_stats: TrainStats | None = None):
        arr = _frozen(normal)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError(f"normal must be a non-empty vector, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)) or not np.isfinite(bias):
            raise ValueError("hyperplane entries must be finite")
        norm = float(np.linalg.norm(arr))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"normal must be unit length (|norm-1| <= 1e-9), got norm {norm!r}")
        self._normal = arr
        self._bias = float(bias)
        self._attribute = attribute
        self._train_stats = train_stats

    @classmethod
    def from_unnormalized(cls, direction, bias: float = 0.0, attribute: str = "",
                          train_stats: TrainStats | None = None) -> "Hyperplane":
        """Normalize a raw (direction, bias) pair; bias is rescaled to match."""
        arr = np.asarray(direction, dtype=np.float64)
        norm = float(np.linalg.norm(arr))
        if norm == 0.0:
            raise ValueError("cannot normalize a zero direction")
        return cls(arr / norm, bias / norm, attribute, train_stats)

    @property
    def normal(self) -> np.ndarray:
        return self._normal

    @property
    def bias(self) -> float:
        return self._bias

    @property
    def attribute(self) -> str:
        return self._attribute

    @property
    def train_stats(self) -> TrainStats | None:
        return self._train_stats

    @property
    def dim(self) -> int:
        return self._normal.size

    def __repr__(self) -> str:
        return f"Hyperplane(dim={self.dim}, attribute={self._attribute!r})"


@dataclass(frozen=True)
class EditStep:
    """Signed offset along a hyperplane normal (dimensionless)."""

    alpha: float

    def __post_init__(self):
        if not np.isfinite(self.alpha):
            raise ValueError("edit step must be finite")


def _check_dims(h: Hyperplane, z: LatentCode) -> None:
    if h.dim != z.dim:
        raise ValueError(f"dimension mismatch: hyperplane dim {h.dim} vs latent dim {z.dim}")


def distance(h: Hyperplane, z: LatentCode) -> float:
    """Signed projection n.z of a code onto the plane normal (no bias)."""
    _check_dims(h, z)
    return float(h.normal @ z.values)


def edit(z: LatentCode, h: Hyperplane, step: EditStep | float) -> LatentCode:
    """Move a code along the normal: z + alpha*n, orthogonal part untouched.

    Since the normal is unit length, the projection of the result exceeds the
    projection of ``z`` by exactly ``alpha``. Space tag and metadata carry over.
    """
    if not isinstance(step, EditStep):
        step = EditStep(float(step))
    _check_dims(h, z)
    return z.with_values(z.values + step.alpha * h.normal)


def classify(h: Hyperplane, z: LatentCode) -> int:
    """SVM decision sign(n.z + bias) in {-1, +1}; an exact zero maps to +1."""
    _check_dims(h, z)
    value = float(h.normal @ z.values) + h.bias
    return 1 if value >= 0.0 else -1
