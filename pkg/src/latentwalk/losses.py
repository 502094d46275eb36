"""Reconstruction and conditioning loss terms, each with an analytic gradient.

Every operation returns ``(value, grad)`` where the gradient is taken with
respect to the op's optimization variable (predicted image, latent code or
label). All image ops accept either a single :class:`~latentwalk.image.ImageBuffer`
or a sequence of them; a sequence is treated as a batch and the loss is the
batch mean, with per-item gradients scaled by 1/N accordingly.

Gradients are derived by hand (see :mod:`latentwalk.filters` for the linear
adjoints) so that the analytic route stays independent of the central
finite-difference oracle used to verify it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .filters import (
    avgpool2,
    avgpool2_adjoint,
    binomial_kernel,
    corr2_same,
    corr2_same_adjoint,
    corr_same,
    corr_same_adjoint,
    corr_valid,
    corr_valid_adjoint,
    gaussian_kernel,
)
from .image import ImageBuffer, same_shape
from .latent import LatentCode

__all__ = [
    "LossWeights", "LabelVector", "LossTerm",
    "FeatureExtractor", "IdentityExtractor", "ConvBankExtractor",
    "PerceptualMetric", "LaplacianPerceptual", "Critic",
    "pixel_logcosh", "feature_l1", "msssim_loss", "perceptual_loss",
    "latent_penalty", "critic_loss", "label_l1", "aggregate_recovery_loss",
    "adv_generator_loss", "identity_cross_entropy", "generator_total_loss",
    "score_controller",
    "MSSSIM_LEVEL_WEIGHTS",
]

#: Conventional five-scale weights; renormalized when fewer levels are used.
MSSSIM_LEVEL_WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)

_SSIM_WINDOW = 11
_SSIM_SIGMA = 1.5
_SSIM_C1 = 0.01 ** 2
_SSIM_C2 = 0.03 ** 2

_TERM_WEIGHT_FIELDS = {
    "pixel": "lambda1",
    "vgg": "lambda2",
    "ssim": "lambda3",
    "percept": "lambda4",
    "penalty": "lambda5",
    "critic": "lambda6",
    "label": "lambda_label",
}


@dataclass(frozen=True)
class LossWeights:
    """Weights of the aggregate recovery objective.

    The source method leaves the lambda values open; the defaults keep the
    pixel term dominant, which is what makes desk-scale recovery stable.
    ``lambda_ip`` weights the identity-preserving term of the conditional
    generator objective and ``lambda_label`` the label term of conditional
    recovery.
    """

    lambda1: float = 1.0      # pixel logcosh
    lambda2: float = 0.4      # deep-feature L1
    lambda3: float = 0.2      # multi-scale SSIM
    lambda4: float = 0.4      # perceptual distance
    lambda5: float = 0.01     # latent penalty toward the average code
    lambda6: float = 0.0      # critic score (disabled without a critic)
    lambda_ip: float = 0.5
    lambda_label: float = 1.0

    def __post_init__(self):
        for name in ("lambda1", "lambda2", "lambda3", "lambda4", "lambda5",
                     "lambda6", "lambda_ip", "lambda_label"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0.0:
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")

    def weight_for(self, term_name: str) -> float:
        try:
            return getattr(self, _TERM_WEIGHT_FIELDS[term_name])
        except KeyError:
            raise ValueError(
                f"unknown loss term {term_name!r}, expected one of "
                f"{sorted(_TERM_WEIGHT_FIELDS)}"
            ) from None


class LabelVector:
    """A conditioning label: scalar beauty score plus a unit identity embedding.

    ``beauty`` lies in [0, 1]; ``identity`` is either empty or unit length to
    within 1e-6.
    """

    __slots__ = ("_beauty", "_identity")

    def __init__(self, beauty: float, identity=()):
        beauty = float(beauty)
        if not np.isfinite(beauty) or not 0.0 <= beauty <= 1.0:
            raise ValueError(f"beauty score must lie in [0, 1], got {beauty!r}")
        ident = np.ascontiguousarray(np.asarray(identity, dtype=np.float64))
        if ident.size and ident.ndim != 1:
            raise ValueError("identity embedding must be a vector")
        if ident.size:
            if not np.all(np.isfinite(ident)):
                raise ValueError("identity embedding must be finite")
            norm = float(np.linalg.norm(ident))
            if abs(norm - 1.0) > 1e-6:
                raise ValueError(
                    f"identity embedding must be unit length (+-1e-6), got norm {norm!r}"
                )
        ident.flags.writeable = False
        self._beauty = beauty
        self._identity = ident

    @property
    def beauty(self) -> float:
        return self._beauty

    @property
    def identity(self) -> np.ndarray:
        return self._identity

    def concat(self) -> np.ndarray:
        """[beauty] followed by the identity entries."""
        return np.concatenate([[self._beauty], self._identity])

    def __len__(self) -> int:
        return 1 + self._identity.size

    def __eq__(self, other):
        if not isinstance(other, LabelVector):
            return NotImplemented
        return self._beauty == other._beauty and np.array_equal(self._identity, other._identity)

    def __repr__(self):
        return f"LabelVector(beauty={self._beauty:.4f}, identity_dim={self._identity.size})"


@dataclass(frozen=True)
class LossTerm:
    """A named, evaluated loss term ready for weighted aggregation.

    ``space`` says which variable the gradient refers to: "image" gradients
    are later pushed through the generator, "latent"/"label" gradients add
    directly onto the corresponding descent variable.
    """

    name: str
    value: float
    grad: object  # ndarray, list of ndarrays, or None
    space: str = "image"

    def __post_init__(self):
        if self.space not in ("image", "latent", "label"):
            raise ValueError(f"unknown gradient space {self.space!r}")


# ---------------------------------------------------------------------------
# plug-in interfaces


class FeatureExtractor:
    """Image -> list of feature maps, plus the matching vector-Jacobian product."""

    def features(self, img: ImageBuffer) -> list[np.ndarray]:
        raise NotImplementedError

    def vjp(self, img: ImageBuffer, upstreams: list[np.ndarray]) -> np.ndarray:
        """Map feature-space gradients back to an (H, W, C) image gradient."""
        raise NotImplementedError


class IdentityExtractor(FeatureExtractor):
    """Features are the pixels themselves; turns feature L1 into plain L1."""

    def features(self, img):
        return [img.pixels]

    def vjp(self, img, upstreams):
        (u,) = upstreams
        return np.asarray(u, dtype=np.float64)


class ConvBankExtractor(FeatureExtractor):
    """A fixed seeded bank of 3x3 convolutions with a tanh nonlinearity.

    Deterministic, differentiable stand-in for pretrained deep features:
    same seed, same kernels, on every platform.
    """

    def __init__(self, seed: int = 0, n_kernels: int = 8, scale: float = 0.6):
        rng = np.random.default_rng(seed)
        self.kernels = rng.normal(0.0, scale, size=(n_kernels, 3, 3, 3))
        self.n_kernels = n_kernels

    def _pre(self, img: ImageBuffer) -> list[np.ndarray]:
        px = img.pixels
        c = img.channels
        return [
            sum(corr2_same(px[:, :, ch], self.kernels[o, ch]) for ch in range(c))
            for o in range(self.n_kernels)
        ]

    def features(self, img):
        return [np.tanh(p) for p in self._pre(img)]

    def vjp(self, img, upstreams):
        pres = self._pre(img)
        grad = np.zeros(img.shape, dtype=np.float64)
        for o, (u, pre) in enumerate(zip(upstreams, pres)):
            du = u * (1.0 - np.tanh(pre) ** 2)
            for ch in range(img.channels):
                grad[:, :, ch] += corr2_same_adjoint(du, self.kernels[o, ch])
        return grad


class PerceptualMetric:
    """Symmetric image distance with a gradient w.r.t. its first argument."""

    def distance(self, a: ImageBuffer, b: ImageBuffer) -> tuple[float, np.ndarray]:
        raise NotImplementedError


class Critic:
    """Image -> scalar realism score with an image-space gradient."""

    def score(self, img: ImageBuffer) -> float:
        raise NotImplementedError

    def grad(self, img: ImageBuffer) -> np.ndarray:
        raise NotImplementedError


# ---------------------------------------------------------------------------
# batching helpers


def _as_batch(x):
    if isinstance(x, ImageBuffer):
        return [x], True
    batch = list(x)
    if not batch:
        raise ValueError("empty image batch")
    return batch, False


def _unbatch(grads, single):
    return grads[0] if single else grads


def _check_batches(pred, target):
    preds, single_p = _as_batch(pred)
    targets, single_t = _as_batch(target)
    if len(preds) != len(targets):
        raise ValueError(f"batch sizes differ: {len(preds)} vs {len(targets)}")
    for p, t in zip(preds, targets):
        same_shape(p, t)
    return preds, targets, single_p and single_t


# ---------------------------------------------------------------------------
# loss terms


def pixel_logcosh(pred, target):
    """Mean log-cosh pixel difference.

    value = mean(log cosh(pred - target)) over all W*H*C entries (and the
    batch); grad = tanh(pred - target) / (W*H*C*N).
    """
    preds, targets, single = _check_batches(pred, target)
    n = len(preds)
    value = 0.0
    grads = []
    for p, t in zip(preds, targets):
        d = p.pixels - t.pixels
        # log cosh(x) = logaddexp(x, -x) - log 2, stable for large |x|
        value += float(np.mean(np.logaddexp(d, -d) - np.log(2.0))) / n
        grads.append(np.tanh(d) / (d.size * n))
    return value, _unbatch(grads, single)


def feature_l1(pred, target, extractor: FeatureExtractor):
    """Mean absolute difference of extracted feature maps.

    Each returned map contributes its elementwise mean |F(target) - F(pred)|;
    map means are averaged so layers weigh equally regardless of size. The
    gradient flows through the extractor's vector-Jacobian product with
    sign subgradients (0 at exact ties).
    """
    preds, targets, single = _check_batches(pred, target)
    n = len(preds)
    value = 0.0
    grads = []
    for p, t in zip(preds, targets):
        fp = extractor.features(p)
        ft = extractor.features(t)
        if len(fp) != len(ft):
            raise ValueError("extractor returned differing map counts for pred/target")
        nmaps = len(fp)
        upstreams = []
        for mp, mt in zip(fp, ft):
            value += float(np.mean(np.abs(mt - mp))) / (nmaps * n)
            upstreams.append(np.sign(mp - mt) / (mp.size * nmaps * n))
        grads.append(extractor.vjp(p, upstreams))
    return value, _unbatch(grads, single)


def max_msssim_levels(height: int, width: int, window: int = _SSIM_WINDOW) -> int:
    """Largest level count the image supports (min side >= window * 2^(L-1))."""
    side = min(height, width)
    levels = 0
    while side >= window:
        levels += 1
        side //= 2
    return levels


def _ssim_maps(x, y, kernel):
    mu_x = corr_valid(x, kernel)
    mu_y = corr_valid(y, kernel)
    xx = corr_valid(x * x, kernel)
    yy = corr_valid(y * y, kernel)
    xy = corr_valid(x * y, kernel)
    sx = xx - mu_x ** 2
    sy = yy - mu_y ** 2
    sxy = xy - mu_x * mu_y
    a1 = 2.0 * mu_x * mu_y + _SSIM_C1
    b1 = mu_x ** 2 + mu_y ** 2 + _SSIM_C1
    a2 = 2.0 * sxy + _SSIM_C2
    b2 = sx + sy + _SSIM_C2
    lum = a1 / b1
    cs = a2 / b2
    return {"mu_x": mu_x, "mu_y": mu_y, "lum": lum, "cs": cs, "b1": b1, "b2": b2,
            "x": x, "y": y}


def _ssim_backward(cache, u_lum, u_cs, kernel):
    """Gradient of sum(u_lum*lum + u_cs*cs) with respect to x."""
    mu_x, mu_y = cache["mu_x"], cache["mu_y"]
    lum, cs = cache["lum"], cache["cs"]
    b1, b2 = cache["b1"], cache["b2"]
    x, y = cache["x"], cache["y"]
    u_a1 = u_lum / b1
    u_b1 = -u_lum * lum / b1
    u_a2 = u_cs / b2
    u_b2 = -u_cs * cs / b2
    u_sxy = 2.0 * u_a2
    u_sx = u_b2
    u_mux = 2.0 * mu_y * u_a1 + 2.0 * mu_x * u_b1 - 2.0 * mu_x * u_sx - mu_y * u_sxy
    u_xx = u_sx
    u_xy = u_sxy
    return (
        corr_valid_adjoint(u_mux, kernel)
        + 2.0 * x * corr_valid_adjoint(u_xx, kernel)
        + y * corr_valid_adjoint(u_xy, kernel)
    )


def msssim_loss(pred, target, levels: int | None = None, level_weights=None):
    """1 - multi-scale structural similarity, with analytic gradient.

    Scales are built by 2x2 average pooling; every scale contributes its mean
    contrast-structure term and the coarsest scale additionally the luminance
    term, combined as a weighted product. Constants C1=0.01^2, C2=0.03^2 on
    the [0,1] range with an 11-tap sigma=1.5 Gaussian window.
    """
    preds, targets, single = _check_batches(pred, target)
    h, w = preds[0].height, preds[0].width
    feasible = max_msssim_levels(h, w)
    if feasible < 1:
        raise ValueError(f"image {h}x{w} is smaller than the {_SSIM_WINDOW}-pixel window")
    if levels is None:
        levels = min(feasible, len(MSSSIM_LEVEL_WEIGHTS))
    if levels < 1:
        raise ValueError("levels must be >= 1")
    if levels > feasible:
        raise ValueError(
            f"image {h}x{w} supports at most {feasible} MS-SSIM level(s), "
            f"got levels={levels}"
        )
    if level_weights is None:
        if levels > len(MSSSIM_LEVEL_WEIGHTS):
            raise ValueError(f"provide level_weights for levels > {len(MSSSIM_LEVEL_WEIGHTS)}")
        base = np.asarray(MSSSIM_LEVEL_WEIGHTS[:levels])
        weights = base / base.sum()
    else:
        weights = np.asarray(level_weights, dtype=np.float64)
        if weights.shape != (levels,):
            raise ValueError(f"level_weights must have length {levels}")
        if np.any(weights < 0) or weights.sum() <= 0:
            raise ValueError("level_weights must be nonnegative with positive sum")
        weights = weights / weights.sum()

    kernel = gaussian_kernel(_SSIM_WINDOW, _SSIM_SIGMA)
    floor = 1e-8  # pow() stability; never active for in-range natural images
    n = len(preds)
    value = 0.0
    grads = []
    for p, t in zip(preds, targets):
        img_grad = np.zeros(p.shape, dtype=np.float64)
        chans = p.channels
        for ch in range(chans):
            xs = [p.pixels[:, :, ch]]
            ys = [t.pixels[:, :, ch]]
            for _ in range(levels - 1):
                xs.append(avgpool2(xs[-1]))
                ys.append(avgpool2(ys[-1]))
            caches = [_ssim_maps(xs[i], ys[i], kernel) for i in range(levels)]
            terms = []
            for i, c in enumerate(caches):
                if i < levels - 1:
                    terms.append(float(np.mean(c["cs"])))
                else:
                    terms.append(float(np.mean(c["lum"] * c["cs"])))
            clamped = np.maximum(terms, floor)
            msssim = float(np.prod(clamped ** weights))
            value += (1.0 - msssim) / (chans * n)

            # d(1-msssim)/dterm_i, zero where the stability floor clamped
            dterm = np.where(
                np.asarray(terms) > floor,
                -msssim * weights / clamped,
                0.0,
            ) / (chans * n)
            grad_level = [None] * levels
            for i, c in enumerate(caches):
                m = c["cs"].size
                if i < levels - 1:
                    u_cs = np.full_like(c["cs"], dterm[i] / m)
                    u_lum = np.zeros_like(u_cs)
                else:
                    u_lum = dterm[i] * c["cs"] / m
                    u_cs = dterm[i] * c["lum"] / m
                grad_level[i] = _ssim_backward(c, u_lum, u_cs, kernel)
            # chain pooled scales back to the finest one
            acc = grad_level[levels - 1]
            for i in range(levels - 2, -1, -1):
                acc = grad_level[i] + avgpool2_adjoint(acc, xs[i].shape)
            img_grad[:, :, ch] = acc
        grads.append(img_grad)
    return value, _unbatch(grads, single)


class LaplacianPerceptual(PerceptualMetric):
    """Perceptual distance over RMS-normalized Laplacian-pyramid responses.

    A pretrained-feature-free stand-in for learned perceptual metrics: each
    pyramid level (band-pass responses plus the low-pass residual) is
    normalized by its own RMS before the squared difference, so the distance
    reacts to structure at every scale rather than raw contrast. Symmetric,
    zero at equal inputs, smooth everywhere (eps keeps the normalizer away
    from zero). Real learned metrics plug in through the same interface.
    """

    def __init__(self, levels: int = 3, eps: float = 1e-3):
        if levels < 1:
            raise ValueError("levels must be >= 1")
        self.levels = levels
        self.eps = eps
        self._kernel = binomial_kernel()

    def _n_levels(self, h: int, w: int) -> int:
        lv = 0
        side = min(h, w)
        while lv < self.levels and side >= 6:
            lv += 1
            side = (side + 1) // 2
        return max(lv, 1)

    def _pyramid(self, plane: np.ndarray):
        gs = [plane]
        lv = self._n_levels(*plane.shape)
        for _ in range(lv):
            gs.append(avgpool2(corr_same(gs[-1], self._kernel)))
        laps = []
        for i in range(lv):
            up = self._upsample(gs[i + 1], gs[i].shape)
            laps.append(gs[i] - up)
        return gs, laps

    def _upsample(self, coarse: np.ndarray, shape) -> np.ndarray:
        stuffed = np.zeros(shape, dtype=np.float64)
        stuffed[::2, ::2] = coarse[: (shape[0] + 1) // 2, : (shape[1] + 1) // 2]
        return 4.0 * corr_same(stuffed, self._kernel)

    def _upsample_adjoint(self, grad: np.ndarray, coarse_shape) -> np.ndarray:
        g = corr_same_adjoint(4.0 * grad, self._kernel)
        return g[::2, ::2][: coarse_shape[0], : coarse_shape[1]]

    def _pyramid_adjoint(self, lap_grads, res_grad, gs):
        # accumulate from the coarsest gaussian level back to the image
        acc = res_grad
        for i in range(len(lap_grads) - 1, -1, -1):
            g_next = acc - self._upsample_adjoint(lap_grads[i], gs[i + 1].shape)
            acc = lap_grads[i] + corr_same_adjoint(
                avgpool2_adjoint(g_next, gs[i].shape), self._kernel
            )
        return acc

    def _normalize(self, v: np.ndarray):
        r = float(np.sqrt(np.mean(v * v) + self.eps ** 2))
        return v / r, r

    def distance(self, a: ImageBuffer, b: ImageBuffer):
        same_shape(a, b)
        chans = a.channels
        value = 0.0
        grad = np.zeros(a.shape, dtype=np.float64)
        for ch in range(chans):
            gs_a, laps_a = self._pyramid(a.pixels[:, :, ch])
            gs_b, laps_b = self._pyramid(b.pixels[:, :, ch])
            bands_a = laps_a + [gs_a[-1]]
            bands_b = laps_b + [gs_b[-1]]
            nb = len(bands_a)
            lap_grads, res_grad = [], None
            for i, (va, vb) in enumerate(zip(bands_a, bands_b)):
                na, ra = self._normalize(va)
                nb_, _ = self._normalize(vb)
                diff = na - nb_
                value += float(np.mean(diff * diff)) / (nb * chans)
                u = 2.0 * diff / (diff.size * nb * chans)
                # d(v/r)/dv with r = sqrt(mean(v^2) + eps^2)
                gv = u / ra - va * (float(np.sum(u * va)) / (va.size * ra ** 3))
                if i < len(laps_a):
                    lap_grads.append(gv)
                else:
                    res_grad = gv
            grad[:, :, ch] = self._pyramid_adjoint(lap_grads, res_grad, gs_a)
        return value, grad


def perceptual_loss(pred, target, metric: PerceptualMetric | None = None):
    """Pluggable perceptual distance; defaults to :class:`LaplacianPerceptual`."""
    if metric is None:
        metric = LaplacianPerceptual()
    preds, targets, single = _check_batches(pred, target)
    n = len(preds)
    value = 0.0
    grads = []
    for p, t in zip(preds, targets):
        v, g = metric.distance(p, t)
        value += v / n
        grads.append(g / n)
    return value, _unbatch(grads, single)


def _latent_batch(z):
    if isinstance(z, LatentCode):
        return [z], True
    batch = list(z)
    if not batch:
        raise ValueError("empty latent batch")
    return batch, False


def latent_penalty(z_pred, z_avg):
    """Mean absolute deviation of the estimated code from the average code."""
    preds, single = _latent_batch(z_pred)
    avgs, single_a = _latent_batch(z_avg)
    if len(avgs) == 1 and len(preds) > 1:
        avgs = avgs * len(preds)
    if len(avgs) != len(preds):
        raise ValueError(f"batch sizes differ: {len(preds)} vs {len(avgs)}")
    n = len(preds)
    value = 0.0
    grads = []
    for zp, za in zip(preds, avgs):
        if zp.dim != za.dim:
            raise ValueError(f"dimension mismatch: {zp.dim} vs {za.dim}")
        d = zp.values - za.values
        value += float(np.mean(np.abs(d))) / n
        grads.append(np.sign(d) / (d.size * n))
    return value, _unbatch(grads, single and single_a)


def critic_loss(pred, critic: Critic):
    """Mean critic score of the predicted images; gradient from the critic."""
    preds, single = _as_batch(pred)
    n = len(preds)
    value = 0.0
    grads = []
    for p in preds:
        value += float(critic.score(p)) / n
        grads.append(np.asarray(critic.grad(p), dtype=np.float64) / n)
    return value, _unbatch(grads, single)


def _label_batch(l):
    if isinstance(l, LabelVector):
        return [l], True
    batch = list(l)
    if not batch:
        raise ValueError("empty label batch")
    return batch, False


def label_l1(l_pred, l_target):
    """Mean absolute difference over concatenated (beauty, identity) labels.

    The gradient is returned in the same concatenated layout: entry 0 is the
    beauty component, the rest the identity components.
    """
    preds, single_p = _label_batch(l_pred)
    targets, single_t = _label_batch(l_target)
    if len(preds) != len(targets):
        raise ValueError(f"batch sizes differ: {len(preds)} vs {len(targets)}")
    n = len(preds)
    value = 0.0
    grads = []
    for lp, lt in zip(preds, targets):
        if len(lp) != len(lt):
            raise ValueError(f"label lengths differ: {len(lp)} vs {len(lt)}")
        d = lp.concat() - lt.concat()
        value += float(np.mean(np.abs(d))) / n
        grads.append(np.sign(d) / (d.size * n))
    return value, _unbatch(grads, single_p and single_t)


def aggregate_recovery_loss(terms, weights: LossWeights):
    """Weighted sum of evaluated terms plus per-space combined gradients.

    Returns ``(value, grads)`` with ``grads`` a dict keyed by gradient space
    ("image", "latent", "label"); image-space gradients are summed here and
    meant to be pushed through the generator afterwards, the others add
    directly onto their descent variables. Spaces with no active term map to
    ``None``.
    """
    total = 0.0
    combined: dict[str, object] = {"image": None, "latent": None, "label": None}
    for term in terms:
        w = weights.weight_for(term.name)
        total += w * term.value
        if w == 0.0 or term.grad is None:
            continue
        acc = combined[term.space]
        if isinstance(term.grad, list):
            scaled = [w * g for g in term.grad]
            combined[term.space] = scaled if acc is None else [a + s for a, s in zip(acc, scaled)]
        else:
            scaled = w * term.grad
            combined[term.space] = scaled if acc is None else acc + scaled
    return total, combined


def adv_generator_loss(fake_scores) -> float:
    """Adversarial generator objective: mean of -D(G(.)) over the batch."""
    scores = np.asarray(fake_scores, dtype=np.float64)
    if scores.size == 0:
        raise ValueError("empty score batch")
    return float(np.mean(-scores))


def identity_cross_entropy(p_real, p_fake, eps: float = 1e-12):
    """Cross entropy (bits) between recognition distributions.

    value = -sum(p_real * log2(p_fake + eps)); the printed source formula
    omits the minus sign, which would make the objective unbounded below, so
    the standard nonnegative form is used. Both inputs must be distributions:
    entries >= 0 summing to 1 within 1e-6.
    """
    pr = np.asarray(p_real, dtype=np.float64)
    pf = np.asarray(p_fake, dtype=np.float64)
    if pr.shape != pf.shape or pr.ndim != 1:
        raise ValueError(f"distributions must be equal-length vectors, got {pr.shape} vs {pf.shape}")
    for name, p in (("p_real", pr), ("p_fake", pf)):
        if np.any(p < 0.0):
            raise ValueError(f"{name} has negative entries")
        if abs(float(p.sum()) - 1.0) > 1e-6:
            raise ValueError(f"{name} must sum to 1 within 1e-6, got {p.sum()!r}")
    value = float(-np.sum(pr * np.log2(pf + eps)))
    grad = -pr / ((pf + eps) * np.log(2.0))
    return value, grad


def generator_total_loss(l_adv: float, l_ip: float, lambda_ip: float = 0.5) -> float:
    """Conditional generator objective: adversarial term plus weighted identity term."""
    return float(l_adv) + float(lambda_ip) * float(l_ip)


def score_controller(gamma: LabelVector, gamma_hat: LabelVector):
    """Squared L2 control penalty between true and estimated labels.

    Returns the squared norm of the concatenated difference and its gradient
    with respect to the estimate.
    """
    if len(gamma) != len(gamma_hat):
        raise ValueError(f"label lengths differ: {len(gamma)} vs {len(gamma_hat)}")
    d = gamma_hat.concat() - gamma.concat()
    return float(np.sum(d * d)), 2.0 * d
