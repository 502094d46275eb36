"""Analytic toy models: deterministic desk-scale stand-ins for real networks.

Every model here is seeded, immutable after construction, differentiable with
a hand-written vector-Jacobian product, and cheap enough that full recovery
runs and dataset sweeps finish in seconds. They exist so that each pipeline
stage can be verified against planted ground truth.
"""

from __future__ import annotations

import numpy as np

from .image import ImageBuffer
from .latent import LatentCode, LatentSpace
from .losses import Critic, LabelVector
from .metrics import Embedder
from .hyperplane import Scorer
from .recovery import ConditionalGenerator, Generator

__all__ = [
    "BlobGenerator", "ToyConditionalGenerator", "LatentLinearScorer",
    "BrightnessScorer", "ToyEmbedder", "ToyCritic", "make_toy",
    "parse_model_spec",
]


def _ortho(rng, n: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    return q * np.sign(np.diag(r))


class _BlobCore:
    """Shared geometry of the blob image family.

    Each group of four latent coordinates drives one Gaussian blob through a
    fixed affine map followed by tanh squashes: center (x, y) around a
    per-blob anchor, a radius band, and a signed amplitude bounded away from
    zero. The constants below were calibrated so that the latent-to-image
    Jacobian stays full rank across the operating box ||z||_inf <= 2: blobs
    keep disjoint territories (anchors on a ring), radius and amplitude stay
    mutually observable (unsaturated field), and no squash flattens out for
    plausible codes (gentle per-channel input gains).
    """

    A_SCALE = 0.45
    CHANNEL_GAINS = (1.0, 1.0, 0.8, 0.6)
    BIAS_SIGMA = 0.15
    ANCHOR_RING = 0.22
    CENTER_GAIN = 0.10
    RADIUS_LO = 0.12
    RADIUS_HALF = 0.045
    AMP_BASE = 0.75
    AMP_SPAN = 0.35
    FIELD_GAIN = 1.0
    CHANNEL_FIELD_GAINS = (1.0, 0.94, 0.88)  # only for 3-channel output

    def __init__(self, dim: int, size: int, channels: int, seed: int):
        if dim < 4 or dim % 4 != 0:
            raise ValueError(f"latent dim must be a positive multiple of 4, got {dim}")
        if size < 4:
            raise ValueError(f"image size must be >= 4, got {size}")
        if channels not in (1, 3):
            raise ValueError(f"channels must be 1 or 3, got {channels}")
        self.dim = dim
        self.size = size
        self.channels = channels
        self.seed = seed
        k = dim // 4
        rng = np.random.default_rng(seed)
        self.mix = np.stack([self.A_SCALE * _ortho(rng, 4) for _ in range(k)])
        self.bias = rng.normal(0.0, self.BIAS_SIGMA, size=(k, 4))
        self.amp_sign = np.where(np.arange(k) % 2 == 0, 1.0, -1.0)
        ang = 2.0 * np.pi * np.arange(k) / k + np.pi / 4.0
        ring = 0.0 if k == 1 else self.ANCHOR_RING
        self.anchor = np.stack(
            [0.5 + ring * np.cos(ang), 0.5 + ring * np.sin(ang)], axis=1)
        self.gains = np.asarray(self.CHANNEL_GAINS)
        xs = (np.arange(size) + 0.5) / size
        self.grid_x, self.grid_y = np.meshgrid(xs, xs)
        self.fgains = np.asarray(self.CHANNEL_FIELD_GAINS[:channels]) * self.FIELD_GAIN

    def _params(self, z: np.ndarray):
        k = self.dim // 4
        p = np.einsum("kij,kj->ki", self.mix, z.reshape(k, 4)) * self.gains + self.bias
        t = np.tanh(p)
        cx = self.anchor[:, 0] + self.CENTER_GAIN * t[:, 0]
        cy = self.anchor[:, 1] + self.CENTER_GAIN * t[:, 1]
        radius = self.RADIUS_LO + self.RADIUS_HALF * (t[:, 2] + 1.0)
        amp = self.amp_sign * (self.AMP_BASE + self.AMP_SPAN * t[:, 3])
        return t, cx, cy, radius, amp

    def _field(self, z: np.ndarray):
        t, cx, cy, radius, amp = self._params(z)
        field = np.zeros((self.size, self.size))
        bumps = []
        for i in range(len(cx)):
            d2 = (self.grid_x - cx[i]) ** 2 + (self.grid_y - cy[i]) ** 2
            bump = np.exp(-d2 / radius[i] ** 2)
            bumps.append(bump)
            field += amp[i] * bump
        return field, bumps, (t, cx, cy, radius, amp)

    def _render(self, field: np.ndarray) -> np.ndarray:
        out = np.empty((self.size, self.size, self.channels))
        for ch in range(self.channels):
            out[:, :, ch] = 0.5 * (np.tanh(self.fgains[ch] * field) + 1.0)
        return out

    def _field_vjp(self, z: np.ndarray, field_grad: np.ndarray) -> np.ndarray:
        """Pull a gradient w.r.t. the scalar field back to the latent code."""
        _, bumps, (t, cx, cy, radius, amp) = self._field(z)
        grad = np.zeros(self.dim)
        for i, bump in enumerate(bumps):
            dx = self.grid_x - cx[i]
            dy = self.grid_y - cy[i]
            d2 = dx ** 2 + dy ** 2
            common = field_grad * amp[i] * bump
            gp = np.array([
                float(np.sum(common * 2.0 * dx / radius[i] ** 2))
                * self.CENTER_GAIN * (1.0 - t[i, 0] ** 2),
                float(np.sum(common * 2.0 * dy / radius[i] ** 2))
                * self.CENTER_GAIN * (1.0 - t[i, 1] ** 2),
                float(np.sum(common * 2.0 * d2 / radius[i] ** 3))
                * self.RADIUS_HALF * (1.0 - t[i, 2] ** 2),
                float(np.sum(field_grad * bump))
                * self.amp_sign[i] * self.AMP_SPAN * (1.0 - t[i, 3] ** 2),
            ]) * self.gains
            grad[4 * i: 4 * i + 4] = self.mix[i].T @ gp
        return grad

    def _render_grad_to_field(self, field: np.ndarray, image_grad: np.ndarray) -> np.ndarray:
        fg = np.zeros_like(field)
        for ch in range(self.channels):
            th = np.tanh(self.fgains[ch] * field)
            fg += image_grad[:, :, ch] * 0.5 * (1.0 - th ** 2) * self.fgains[ch]
        return fg


class BlobGenerator(Generator):
    """Deterministic d-latent -> grayscale/RGB blob-image generator.

    ``pixel = (tanh(sum_k amp_k * exp(-dist_k^2 / radius_k^2)) + 1) / 2``
    with per-blob parameters squashed out of the latent code; see
    :class:`_BlobCore` for the calibration rationale.
    """

    def __init__(self, dim: int = 8, size: int = 64, channels: int = 1, seed: int = 7):
        self._core = _BlobCore(dim, size, channels, seed)
        self.latent_space = LatentSpace("Z")

    @property
    def latent_dim(self) -> int:
        return self._core.dim

    @property
    def image_shape(self) -> tuple[int, int, int]:
        return (self._core.size, self._core.size, self._core.channels)

    def synthesize(self, z: LatentCode) -> ImageBuffer:
        self._check(z)
        field, _, _ = self._core._field(z.values)
        return ImageBuffer(self._core._render(field))

    def vjp(self, z: LatentCode, image_grad: np.ndarray) -> np.ndarray:
        self._check(z)
        grad = np.asarray(image_grad, dtype=np.float64)
        if grad.ndim == 2:
            grad = grad[:, :, None]
        field, _, _ = self._core._field(z.values)
        return self._core._field_vjp(z.values, self._core._render_grad_to_field(field, grad))

    def _check(self, z: LatentCode):
        if z.dim != self._core.dim:
            raise ValueError(f"latent dim {z.dim} != generator dim {self._core.dim}")


class ToyConditionalGenerator(ConditionalGenerator):
    """Blob generator conditioned on (beauty score, identity embedding).

    The beauty score adds a global brightness shift to the field, strictly
    monotone in alpha for any fixed (z, beta); the first four identity
    entries nudge the blob centers through a fixed linear map. The brightness
    gain is kept gentle so the score direction shares the curvature scale of
    the latent directions; a global shift at full strength would make joint
    constant-rate descent oscillate in alpha long before z converges.
    """

    BRIGHT_GAIN = 0.05
    BETA_GAIN = 0.08

    def __init__(self, dim: int = 8, size: int = 64, channels: int = 1,
                 beta_dim: int = 8, seed: int = 7):
        if beta_dim < 4:
            raise ValueError(f"beta_dim must be >= 4, got {beta_dim}")
        self._core = _BlobCore(dim, size, channels, seed)
        self._beta_dim = beta_dim
        rng = np.random.default_rng(seed + 1)
        k = dim // 4
        self._beta_mix = rng.normal(0.0, 1.0, size=(k, 2, 4)) / np.sqrt(4.0)
        self.latent_space = LatentSpace("Z")

    @property
    def latent_dim(self) -> int:
        return self._core.dim

    @property
    def beta_dim(self) -> int:
        return self._beta_dim

    @property
    def image_shape(self) -> tuple[int, int, int]:
        return (self._core.size, self._core.size, self._core.channels)

    def _label_parts(self, label) -> tuple[float, np.ndarray]:
        if isinstance(label, LabelVector):
            alpha, beta = label.beauty, label.identity
        else:
            arr = np.asarray(label, dtype=np.float64)
            alpha, beta = float(arr[0]), arr[1:]
        if beta.size != self._beta_dim:
            raise ValueError(f"identity dim {beta.size} != generator beta_dim {self._beta_dim}")
        return float(alpha), beta

    def _shifted_field(self, z: np.ndarray, alpha: float, beta: np.ndarray):
        core = self._core
        t, cx, cy, radius, amp = core._params(z)
        offsets = np.einsum("kij,j->ki", self._beta_mix, beta[:4]) * self.BETA_GAIN
        cx = cx + offsets[:, 0]
        cy = cy + offsets[:, 1]
        field = np.full((core.size, core.size), self.BRIGHT_GAIN * (alpha - 0.5))
        bumps = []
        for i in range(len(cx)):
            d2 = (core.grid_x - cx[i]) ** 2 + (core.grid_y - cy[i]) ** 2
            bump = np.exp(-d2 / radius[i] ** 2)
            bumps.append(bump)
            field += amp[i] * bump
        return field, bumps, (t, cx, cy, radius, amp)

    def synthesize(self, z: LatentCode, label) -> ImageBuffer:
        self._check(z)
        alpha, beta = self._label_parts(label)
        field, _, _ = self._shifted_field(z.values, alpha, beta)
        return ImageBuffer(self._core._render(field))

    def vjp(self, z: LatentCode, label, image_grad: np.ndarray):
        self._check(z)
        alpha, beta = self._label_parts(label)
        core = self._core
        grad = np.asarray(image_grad, dtype=np.float64)
        if grad.ndim == 2:
            grad = grad[:, :, None]
        field, bumps, (t, cx, cy, radius, amp) = self._shifted_field(z.values, alpha, beta)
        fg = core._render_grad_to_field(field, grad)

        z_grad = np.zeros(core.dim)
        center_grads = np.zeros((len(bumps), 2))
        for i, bump in enumerate(bumps):
            dx = core.grid_x - cx[i]
            dy = core.grid_y - cy[i]
            d2 = dx ** 2 + dy ** 2
            common = fg * amp[i] * bump
            gcx = float(np.sum(common * 2.0 * dx / radius[i] ** 2))
            gcy = float(np.sum(common * 2.0 * dy / radius[i] ** 2))
            center_grads[i] = (gcx, gcy)
            gp = np.array([
                gcx * core.CENTER_GAIN * (1.0 - t[i, 0] ** 2),
                gcy * core.CENTER_GAIN * (1.0 - t[i, 1] ** 2),
                float(np.sum(common * 2.0 * d2 / radius[i] ** 3))
                * core.RADIUS_HALF * (1.0 - t[i, 2] ** 2),
                float(np.sum(fg * bump))
                * core.amp_sign[i] * core.AMP_SPAN * (1.0 - t[i, 3] ** 2),
            ]) * core.gains
            z_grad[4 * i: 4 * i + 4] = core.mix[i].T @ gp

        label_grad = np.zeros(1 + self._beta_dim)
        label_grad[0] = float(np.sum(fg)) * self.BRIGHT_GAIN
        label_grad[1:5] = self.BETA_GAIN * np.einsum("ki,kij->j", center_grads, self._beta_mix)
        return z_grad, label_grad

    def _check(self, z: LatentCode):
        if z.dim != self._core.dim:
            raise ValueError(f"latent dim {z.dim} != generator dim {self._core.dim}")


class LatentLinearScorer(Scorer):
    """Score = w.z for a fixed seeded unit direction; skips the image entirely.

    The planted-linear ground truth for hyperplane training: the attribute is
    exactly linearly separable, so a perfect hyperplane exists by construction.
    """

    needs_image = False

    def __init__(self, dim: int = 8, seed: int = 3):
        rng = np.random.default_rng(seed)
        w = rng.standard_normal(dim)
        self.direction = w / np.linalg.norm(w)
        self.dim = dim

    def score(self, image: ImageBuffer | None, latent: LatentCode | None = None) -> float:
        if latent is None:
            raise ValueError("latent-linear scorer needs the latent code")
        if latent.dim != self.dim:
            raise ValueError(f"latent dim {latent.dim} != scorer dim {self.dim}")
        return float(self.direction @ latent.values)


class BrightnessScorer(Scorer):
    """Mean luminance of the image, in [0, 1]."""

    needs_image = True

    def score(self, image: ImageBuffer | None, latent: LatentCode | None = None) -> float:
        if image is None:
            raise ValueError("brightness scorer needs the image")
        return float(image.gray().mean())


class ToyEmbedder(Embedder):
    """Pooled, mean-removed, unit-normalized thumbnail as an identity vector.

    The image collapses to a ``grid x grid`` luminance thumbnail, the mean is
    removed and the result normalized; a flat image (zero after mean removal)
    maps to a fixed canonical unit vector so the output is always unit norm.
    """

    def __init__(self, grid: int = 8):
        if grid < 1:
            raise ValueError("grid must be >= 1")
        self.grid = grid

    @property
    def dim(self) -> int:
        return self.grid * self.grid

    def embed(self, img: ImageBuffer) -> np.ndarray:
        g = img.gray()
        h, w = g.shape
        rows = (np.arange(h) * self.grid) // h
        cols = (np.arange(w) * self.grid) // w
        pooled = np.zeros((self.grid, self.grid))
        counts = np.zeros((self.grid, self.grid))
        np.add.at(pooled, (rows[:, None].repeat(w, 1), cols[None, :].repeat(h, 0)), g)
        np.add.at(counts, (rows[:, None].repeat(w, 1), cols[None, :].repeat(h, 0)), 1.0)
        vec = (pooled / counts).ravel()
        vec = vec - vec.mean()
        norm = float(np.linalg.norm(vec))
        if norm < 1e-12:
            canon = np.zeros(self.dim)
            canon[0] = 1.0
            return canon
        return vec / norm


class ToyCritic(Critic):
    """Smooth seeded image score with an analytic gradient.

    score = mean(w * tanh(2.5 * pixel + c)) with fixed weight/phase fields
    drawn per image shape from the seed.
    """

    def __init__(self, seed: int = 11):
        self.seed = seed

    def _fields(self, shape):
        rng = np.random.default_rng([self.seed, *shape])
        w = rng.normal(0.0, 1.0, size=shape)
        c = rng.uniform(-1.0, 1.0, size=shape)
        return w, c

    def score(self, img: ImageBuffer) -> float:
        w, c = self._fields(img.shape)
        return float(np.mean(w * np.tanh(2.5 * img.pixels + c)))

    def grad(self, img: ImageBuffer) -> np.ndarray:
        w, c = self._fields(img.shape)
        th = np.tanh(2.5 * img.pixels + c)
        return w * 2.5 * (1.0 - th ** 2) / img.pixels.size


_TOY_KINDS = ("blob", "condblob", "latentlinear", "brightness", "embedder", "critic")


def make_toy(kind: str, seed: int = 7, params: dict | None = None):
    """Build a toy model instance from a kind tag, a seed and parameters.

    Known kinds: ``blob`` (d, size, channels), ``condblob`` (d, size,
    channels, beta_dim), ``latentlinear`` (dim), ``brightness``, ``embedder``
    (grid), ``critic``. Same inputs give byte-identical instances everywhere.
    """
    if kind not in _TOY_KINDS:
        raise ValueError(f"unknown toy kind {kind!r}, expected one of {_TOY_KINDS}")
    p = dict(params or {})
    if kind == "blob":
        out = BlobGenerator(dim=int(p.pop("d", p.pop("dim", 8))),
                            size=int(p.pop("size", 64)),
                            channels=int(p.pop("channels", 1)), seed=seed)
    elif kind == "condblob":
        out = ToyConditionalGenerator(dim=int(p.pop("d", p.pop("dim", 8))),
                                      size=int(p.pop("size", 64)),
                                      channels=int(p.pop("channels", 1)),
                                      beta_dim=int(p.pop("beta_dim", 8)), seed=seed)
    elif kind == "latentlinear":
        out = LatentLinearScorer(dim=int(p.pop("dim", p.pop("d", 8))), seed=seed)
    elif kind == "brightness":
        out = BrightnessScorer()
    elif kind == "embedder":
        out = ToyEmbedder(grid=int(p.pop("grid", 8)))
    else:
        out = ToyCritic(seed=seed)
    if p:
        raise ValueError(f"unknown parameters for toy kind {kind!r}: {sorted(p)}")
    return out


def parse_model_spec(spec: str):
    """Parse a CLI model spec like ``blob:d=8,size=64,seed=7`` into an instance."""
    kind, _, rest = spec.partition(":")
    kind = kind.strip().lower()
    params: dict = {}
    if rest:
        for item in rest.split(","):
            key, sep, value = item.partition("=")
            if not sep:
                raise ValueError(f"bad model spec item {item!r} in {spec!r}")
            key = key.strip()
            value = value.strip()
            try:
                params[key] = int(value)
            except ValueError:
                try:
                    params[key] = float(value)
                except ValueError:
                    params[key] = value
    seed = int(params.pop("seed", 7))
    return make_toy(kind, seed=seed, params=params)
