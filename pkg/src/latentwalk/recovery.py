"""Gradient-descent latent recovery, unconditional and conditional.

The descent is the plain constant-rate rule z <- z - eta * grad(L), where L
is the weighted aggregate of the loss terms enabled by the config. One run is
strictly sequential; determinism is exact given (target, config, seed). The
returned code is the iterate with the lowest recorded total loss, which is
not necessarily the last one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .image import ImageBuffer, same_shape
from .latent import LatentCode, LatentSpace
from .losses import (
    Critic,
    FeatureExtractor,
    LabelVector,
    LossTerm,
    LossWeights,
    PerceptualMetric,
    aggregate_recovery_loss,
    feature_l1,
    label_l1,
    latent_penalty,
    msssim_loss,
    perceptual_loss,
    pixel_logcosh,
    critic_loss,
)

__all__ = [
    "Generator", "ConditionalGenerator", "RecoveryConfig", "StepRecord",
    "RecoveryTrace", "recover", "recover_conditional", "stochastic_clip",
    "finite_difference_vjp",
]

_INIT_MODES = ("AUTO", "ZERO", "AVERAGE", "EXPLICIT", "SEEDED_RANDOM")
_STOP_WINDOW = 50


class Generator:
    """Deterministic latent -> image map with a vector-Jacobian product.

    Implementations without an analytic ``vjp`` may set ``has_vjp = False``;
    recovery then falls back to central finite differences, which is only
    permitted for latent dims <= 64.
    """

    has_vjp = True
    latent_space = LatentSpace("Z")

    @property
    def latent_dim(self) -> int:
        raise NotImplementedError

    def synthesize(self, z: LatentCode) -> ImageBuffer:
        raise NotImplementedError

    def vjp(self, z: LatentCode, image_grad: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class ConditionalGenerator:
    """Latent + label -> image, with a vjp over both inputs."""

    has_vjp = True
    latent_space = LatentSpace("Z")

    @property
    def latent_dim(self) -> int:
        raise NotImplementedError

    @property
    def beta_dim(self) -> int:
        raise NotImplementedError

    def synthesize(self, z: LatentCode, label) -> ImageBuffer:
        raise NotImplementedError

    def vjp(self, z: LatentCode, label, image_grad: np.ndarray):
        """Returns (latent_grad, label_grad) with label_grad concat-ordered."""
        raise NotImplementedError


@dataclass(frozen=True)
class RecoveryConfig:
    """Everything a recovery run needs besides the target and the generator.

    ``init`` picks the starting code: ZERO, AVERAGE (uses ``z_avg``),
    EXPLICIT (uses ``z_init``), SEEDED_RANDOM (standard normal from ``seed``),
    or AUTO, which resolves to AVERAGE when ``z_avg`` is present and ZERO
    otherwise. ``z_avg`` also anchors the latent penalty term; it defaults to
    the origin, the mean of the standard-normal prior.
    """

    weights: LossWeights = field(default_factory=LossWeights)
    eta: float = 0.05
    max_steps: int = 1000
    init: str = "AUTO"
    z_init: LatentCode | None = None
    z_avg: LatentCode | None = None
    beauty_range: tuple[float, float] = (0.0, 1.0)
    renormalize_identity: bool = True
    stop_tolerance: float = 1e-7
    seed: int = 0
    msssim_levels: int | None = None

    def __post_init__(self):
        if not np.isfinite(self.eta) or self.eta < 0.0:
            raise ValueError(f"eta must be finite and >= 0, got {self.eta!r}")
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps!r}")
        if self.init not in _INIT_MODES:
            raise ValueError(f"unknown init mode {self.init!r}, expected one of {_INIT_MODES}")
        lo, hi = self.beauty_range
        if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
            raise ValueError(f"beauty_range must satisfy lo < hi, got {self.beauty_range!r}")
        if lo < 0.0 or hi > 1.0:
            raise ValueError(f"beauty_range must lie within [0, 1], got {self.beauty_range!r}")
        if not np.isfinite(self.stop_tolerance) or self.stop_tolerance < 0.0:
            raise ValueError(f"stop_tolerance must be >= 0, got {self.stop_tolerance!r}")

    def initial_latent(self, dim: int, space: LatentSpace, rng) -> np.ndarray:
        mode = self.init
        if mode == "AUTO":
            mode = "AVERAGE" if self.z_avg is not None else "ZERO"
        if mode == "ZERO":
            return np.zeros(dim)
        if mode == "AVERAGE":
            if self.z_avg is None:
                raise ValueError("init=AVERAGE requires z_avg in the config")
            if self.z_avg.dim != dim:
                raise ValueError(f"z_avg dim {self.z_avg.dim} != generator dim {dim}")
            return self.z_avg.values.copy()
        if mode == "EXPLICIT":
            if self.z_init is None:
                raise ValueError("init=EXPLICIT requires z_init in the config")
            if self.z_init.dim != dim:
                raise ValueError(f"z_init dim {self.z_init.dim} != generator dim {dim}")
            return self.z_init.values.copy()
        return rng.standard_normal(dim)


@dataclass(frozen=True)
class StepRecord:
    step: int
    total: float
    terms: dict
    grad_norm: float


@dataclass(frozen=True)
class RecoveryTrace:
    """Complete per-step history of one recovery run."""

    records: tuple
    stop_reason: str  # CONVERGED or MAX_STEPS
    best_step: int

    @property
    def steps(self) -> int:
        return len(self.records)

    @property
    def best_total(self) -> float:
        return self.records[self.best_step].total

    def totals(self) -> np.ndarray:
        return np.array([r.total for r in self.records])

    def term_values(self, name: str) -> np.ndarray:
        return np.array([r.terms[name] for r in self.records])


def stochastic_clip(x: float, lo: float, hi: float, rng) -> float:
    """Pass in-range values through; replace out-of-range ones uniformly.

    An out-of-range optimization variable is projected onto a uniform random
    point inside [lo, hi] instead of the boundary, so repeated violations do
    not pile up on the edges.
    """
    if not lo < hi:
        raise ValueError(f"stochastic_clip needs lo < hi, got [{lo!r}, {hi!r}]")
    x = float(x)
    if lo <= x <= hi:
        return x
    return float(rng.uniform(lo, hi))


def finite_difference_vjp(gen: Generator, z: LatentCode, upstream: np.ndarray,
                          h: float = 1e-4) -> np.ndarray:
    """Central-difference fallback for generators without an analytic vjp."""
    if z.dim > 64:
        raise ValueError(f"finite-difference vjp allowed only for dim <= 64, got {z.dim}")
    up = np.asarray(upstream, dtype=np.float64)
    grad = np.zeros(z.dim)
    base = z.values
    for i in range(z.dim):
        zp = base.copy()
        zm = base.copy()
        zp[i] += h
        zm[i] -= h
        fp = float(np.sum(gen.synthesize(z.with_values(zp)).pixels * up))
        fm = float(np.sum(gen.synthesize(z.with_values(zm)).pixels * up))
        grad[i] = (fp - fm) / (2.0 * h)
    return grad


def _gen_vjp(gen, z, image_grad):
    if getattr(gen, "has_vjp", True):
        return gen.vjp(z, image_grad)
    return finite_difference_vjp(gen, z, image_grad)


def _require(plugin, weight, term, what):
    if weight > 0.0 and plugin is None:
        raise ValueError(
            f"loss weight for {term!r} is {weight} but no {what} was supplied"
        )


def _image_terms(pred, target, weights, cfg, extractor, perceptual, critic):
    terms = []
    if weights.lambda1 > 0.0:
        v, g = pixel_logcosh(pred, target)
        terms.append(LossTerm("pixel", v, g, "image"))
    if weights.lambda2 > 0.0:
        v, g = feature_l1(pred, target, extractor)
        terms.append(LossTerm("vgg", v, g, "image"))
    if weights.lambda3 > 0.0:
        v, g = msssim_loss(pred, target, levels=cfg.msssim_levels)
        terms.append(LossTerm("ssim", v, g, "image"))
    if weights.lambda4 > 0.0:
        v, g = perceptual_loss(pred, target, perceptual)
        terms.append(LossTerm("percept", v, g, "image"))
    if critic is not None and weights.lambda6 > 0.0:
        v, g = critic_loss(pred, critic)
        terms.append(LossTerm("critic", v, g, "image"))
    return terms


def _check_finite(total, step):
    if not np.isfinite(total):
        raise FloatingPointError(f"non-finite recovery loss ({total!r}) at step {step}")


def recover(target: ImageBuffer, gen: Generator, cfg: RecoveryConfig,
            extractor: FeatureExtractor | None = None,
            perceptual: PerceptualMetric | None = None,
            critic: Critic | None = None):
    """Recover a latent code whose synthesis matches the target image.

    Every enabled loss term needs its plug-in: deep-feature L1 an extractor,
    the perceptual term a metric (pass :class:`~latentwalk.losses.LaplacianPerceptual`
    for the built-in), the critic term a critic. Returns ``(code, trace)``.
    """
    probe = gen.synthesize(LatentCode(np.zeros(gen.latent_dim), gen.latent_space))
    same_shape(probe, target, "generator output and target")
    w = cfg.weights
    _require(extractor, w.lambda2, "vgg", "feature extractor")
    _require(perceptual, w.lambda4, "percept", "perceptual metric")
    _require(critic, w.lambda6, "critic", "critic")

    rng = np.random.default_rng(cfg.seed)
    z = cfg.initial_latent(gen.latent_dim, gen.latent_space, rng)
    z_avg = cfg.z_avg if cfg.z_avg is not None else LatentCode(
        np.zeros(gen.latent_dim), gen.latent_space)

    records = []
    best_total = np.inf
    best_z = z.copy()
    best_step = 0
    stop_reason = "MAX_STEPS"
    for step in range(cfg.max_steps):
        zc = LatentCode(z, gen.latent_space)
        pred = gen.synthesize(zc)
        terms = _image_terms(pred, target, w, cfg, extractor, perceptual, critic)
        if w.lambda5 > 0.0:
            v, g = latent_penalty(zc, z_avg)
            terms.append(LossTerm("penalty", v, g, "latent"))
        total, grads = aggregate_recovery_loss(terms, w)
        _check_finite(total, step)

        latent_grad = np.zeros(gen.latent_dim)
        if grads["image"] is not None:
            latent_grad += _gen_vjp(gen, zc, grads["image"])
        if grads["latent"] is not None:
            latent_grad += grads["latent"]

        records.append(StepRecord(step, total, {t.name: t.value for t in terms},
                                  float(np.linalg.norm(latent_grad))))
        if total < best_total:
            best_total = total
            best_z = z.copy()
            best_step = step
        if step >= _STOP_WINDOW and (
                records[step - _STOP_WINDOW].total - total < cfg.stop_tolerance):
            stop_reason = "CONVERGED"
            break
        z = z - cfg.eta * latent_grad

    trace = RecoveryTrace(tuple(records), stop_reason, best_step)
    return LatentCode(best_z, gen.latent_space), trace


def recover_conditional(target: ImageBuffer, cgen: ConditionalGenerator,
                        cfg: RecoveryConfig, label_target: LabelVector,
                        extractor: FeatureExtractor | None = None,
                        perceptual: PerceptualMetric | None = None):
    """Jointly recover (latent, beauty, identity) for a conditional generator.

    The objective swaps the penalty/critic terms for a label L1 term against
    the externally estimated target label. After every step the beauty score
    is stochastically clipped into ``cfg.beauty_range`` and the identity part
    renormalized to the unit sphere when ``cfg.renormalize_identity`` is set
    (if unset, the identity part drifts freely during the descent and is only
    renormalized when packing the returned label).

    Returns ``(code, label, trace)``, the best-loss iterate.
    """
    if len(label_target) != 1 + cgen.beta_dim:
        raise ValueError(
            f"label target has identity dim {len(label_target) - 1}, "
            f"generator expects {cgen.beta_dim}"
        )
    w = cfg.weights
    _require(extractor, w.lambda2, "vgg", "feature extractor")
    _require(perceptual, w.lambda4, "percept", "perceptual metric")

    rng = np.random.default_rng(cfg.seed)
    z = cfg.initial_latent(cgen.latent_dim, cgen.latent_space, rng)
    lo, hi = cfg.beauty_range
    alpha = float(rng.uniform(lo, hi))
    beta = rng.standard_normal(cgen.beta_dim)
    beta /= np.linalg.norm(beta)

    probe = cgen.synthesize(LatentCode(z, cgen.latent_space), _pack_label(alpha, beta))
    same_shape(probe, target, "generator output and target")

    records = []
    best = (np.inf, z.copy(), alpha, beta.copy(), 0)
    stop_reason = "MAX_STEPS"
    for step in range(cfg.max_steps):
        zc = LatentCode(z, cgen.latent_space)
        label = _pack_label(alpha, beta)
        pred = cgen.synthesize(zc, label)
        terms = _image_terms(pred, target, w, cfg, extractor, perceptual, None)
        if w.lambda_label > 0.0:
            v, g = label_l1(label, label_target)
            terms.append(LossTerm("label", v, g, "label"))
        total, grads = aggregate_recovery_loss(terms, w)
        _check_finite(total, step)

        latent_grad = np.zeros(cgen.latent_dim)
        label_grad = np.zeros(1 + cgen.beta_dim)
        if grads["image"] is not None:
            zg, lg = cgen.vjp(zc, label, grads["image"])
            latent_grad += zg
            label_grad += lg
        if grads["label"] is not None:
            label_grad += grads["label"]

        gnorm = float(np.sqrt(np.linalg.norm(latent_grad) ** 2
                              + np.linalg.norm(label_grad) ** 2))
        records.append(StepRecord(step, total, {t.name: t.value for t in terms}, gnorm))
        if total < best[0]:
            best = (total, z.copy(), alpha, beta.copy(), step)
        if step >= _STOP_WINDOW and (
                records[step - _STOP_WINDOW].total - total < cfg.stop_tolerance):
            stop_reason = "CONVERGED"
            break

        z = z - cfg.eta * latent_grad
        alpha = alpha - cfg.eta * label_grad[0]
        beta = beta - cfg.eta * label_grad[1:]
        alpha = stochastic_clip(alpha, lo, hi, rng)
        if cfg.renormalize_identity:
            beta = _renorm(beta)

    _, bz, ba, bb, best_step = best
    trace = RecoveryTrace(tuple(records), stop_reason, best_step)
    return (LatentCode(bz, cgen.latent_space),
            LabelVector(min(max(ba, 0.0), 1.0), _renorm(bb)),
            trace)


def _renorm(beta: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(beta))
    if norm < 1e-12:
        out = np.zeros_like(beta)
        out[0] = 1.0
        return out
    return beta / norm


def _pack_label(alpha: float, beta: np.ndarray) -> LabelVector:
    # descent iterates may drift off the unit sphere; LabelVector is only for
    # the interface boundary, so renormalize defensively here
    return LabelVector(min(max(float(alpha), 0.0), 1.0), _renorm(beta))
