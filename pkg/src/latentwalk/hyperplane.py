"""Scored-latent dataset generation and linear SVM hyperplane training.

The protocol: sample latent codes from the standard normal prior, score each
one (through the generator image or an image-free shortcut), label the score
extremes +-1, fit a linear max-margin separator in the primal with
deterministic subgradient descent, and report accuracies on held-out extreme
and leftover pools.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image import ImageBuffer
from .latent import Hyperplane, LatentCode, TrainStats, classify
from .recovery import Generator

__all__ = [
    "Scorer", "ScoredSample", "SvmConfig",
    "draw_latents", "iter_samples", "sample_dataset", "select_extremes",
    "train_svm", "evaluate_hyperplane", "score_cutoff_rule", "extremes_of",
    "train_and_evaluate",
]


class Scorer:
    """Attribute score of a generated image.

    ``needs_image = False`` lets image-free scorers (for example latent-linear
    ground truth) skip synthesis entirely; the latent is always offered.
    """

    needs_image = True

    def score(self, image: ImageBuffer | None, latent: LatentCode | None = None) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class ScoredSample:
    """A latent code with its attribute score and optional rendered image path."""

    latent: LatentCode
    score: float
    image_ref: str | None = None

    def __post_init__(self):
        if not np.isfinite(self.score):
            raise ValueError(f"sample score must be finite, got {self.score!r}")


@dataclass(frozen=True)
class SvmConfig:
    """Primal SVM solver and split-protocol settings."""

    epochs: int = 50
    reg: float = 1e-4
    step_scale: float = 1.0  # eta_t = step_scale / (reg * t)
    seed: int = 0
    pos_count: int = 5600
    neg_count: int = 5600
    val_count: int = 4800

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not np.isfinite(self.reg) or self.reg <= 0.0:
            raise ValueError("regularization strength must be positive")
        if self.step_scale <= 0.0:
            raise ValueError("step_scale must be positive")
        for name in ("pos_count", "neg_count", "val_count"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


def draw_latents(dim: int, n: int, seed: int) -> np.ndarray:
    """The dataset prior: n i.i.d. standard-normal codes from one seeded stream."""
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    return np.random.default_rng(seed).standard_normal((n, dim))


def iter_samples(gen: Generator, scorer: Scorer, n: int, seed: int):
    """Yield (index, latent, score, image-or-None) deterministically.

    Latents are i.i.d. standard normal per coordinate from one seeded stream;
    the image is synthesized only when the scorer asks for it. A scorer
    failure aborts with the offending sample index.
    """
    zs = draw_latents(gen.latent_dim, n, seed)
    for i in range(n):
        z = LatentCode(zs[i], gen.latent_space)
        image = gen.synthesize(z) if scorer.needs_image else None
        try:
            s = float(scorer.score(image, z))
        except Exception as exc:
            raise RuntimeError(f"scorer failed on sample {i}: {exc}") from exc
        yield i, z, s, image


def sample_dataset(gen: Generator, scorer: Scorer, n: int, seed: int) -> list[ScoredSample]:
    """Draw and score ``n`` prior samples; reproducible from the seed."""
    return [ScoredSample(z, s) for _, z, s, _ in iter_samples(gen, scorer, n, seed)]


def select_extremes(samples, k_pos: int, k_neg: int):
    """Label the score extremes: top ``k_pos`` as +1, bottom ``k_neg`` as -1.

    Ties break stably by sample index; the two selections never overlap
    (positives are taken first, negatives from the rest). Returns a list of
    ``(sample, label)`` pairs, positives first.
    """
    samples = list(samples)
    n = len(samples)
    if k_pos < 1 or k_neg < 1:
        raise ValueError("k_pos and k_neg must be >= 1")
    if k_pos + k_neg > n:
        raise ValueError(f"k_pos + k_neg = {k_pos + k_neg} exceeds sample count {n}")
    scores = np.array([s.score for s in samples])
    desc = np.argsort(-scores, kind="stable")
    pos_idx = desc[:k_pos]
    pos_set = set(pos_idx.tolist())
    asc = np.argsort(scores, kind="stable")
    neg_idx = [i for i in asc if i not in pos_set][:k_neg]
    out = [(samples[i], 1) for i in pos_idx]
    out += [(samples[i], -1) for i in neg_idx]
    return out


def train_svm(labeled, cfg: SvmConfig | None = None) -> Hyperplane:
    """Fit a hinge-loss + L2 primal linear SVM by seeded subgradient descent.

    Per-sample updates over shuffled epochs with the schedule
    eta_t = step_scale / (reg * t); the bias stays unregularized. The final
    direction is L2-normalized (bias rescaled with it) so the result
    satisfies the unit-normal hyperplane invariant.
    """
    cfg = cfg or SvmConfig()
    labeled = list(labeled)
    if not labeled:
        raise ValueError("empty training set")
    X = np.stack([s.latent.values for s, _ in labeled])
    y = np.array([float(lbl) for _, lbl in labeled])
    if not (np.any(y > 0) and np.any(y < 0)):
        raise ValueError("training set must contain both classes")
    n, dim = X.shape

    # the bias rides along as a constant-feature weight so it shares the
    # shrinkage; an unregularized bias would keep the huge first-step kick
    # of the 1/(reg*t) schedule forever
    aug = np.concatenate([X, np.ones((n, 1))], axis=1)
    rng = np.random.default_rng(cfg.seed)
    wb = np.zeros(dim + 1)
    ball = 1.0 / np.sqrt(cfg.reg)    # optimum lies inside this ball; projecting
    total = cfg.epochs * n           # removes the early huge-step transient
    tail_start = total - total // 2  # suffix averaging: the 1/(reg*t) steps
    tail_sum = np.zeros(dim + 1)     # stay large, so the last iterate wobbles
    tail_n = 0
    t = 0
    for _ in range(cfg.epochs):
        for i in rng.permutation(n):
            t += 1
            eta = cfg.step_scale / (cfg.reg * t)
            margin = y[i] * (wb @ aug[i])
            wb *= 1.0 - eta * cfg.reg
            if margin < 1.0:
                wb += eta * y[i] * aug[i]
            wnorm = float(np.linalg.norm(wb))
            if wnorm > ball:
                wb *= ball / wnorm
            if t > tail_start:
                tail_sum += wb
                tail_n += 1

    wb = tail_sum / tail_n
    w, b = wb[:dim], float(wb[dim])
    norm = float(np.linalg.norm(w))
    if norm == 0.0:
        raise ValueError("SVM collapsed to a zero direction; check the data")
    plane = Hyperplane(w / norm, b / norm, attribute="")
    train_acc = _accuracy(plane, X, y)
    return Hyperplane(plane.normal, plane.bias, attribute="",
                      train_stats=TrainStats(train_accuracy=train_acc))


def _accuracy(plane: Hyperplane, X: np.ndarray, y: np.ndarray) -> float:
    decisions = X @ plane.normal + plane.bias
    pred = np.where(decisions >= 0.0, 1.0, -1.0)
    return float(np.mean(pred == y))


def score_cutoff_rule(cutoff: float):
    """Threshold rule: score >= cutoff maps to +1, below to -1."""
    def rule(score: float) -> int:
        return 1 if score >= cutoff else -1
    return rule


def extremes_of(samples, k_pos: int, k_neg: int):
    """Convenience: extreme subset of a pool, already (sample, label) paired."""
    return select_extremes(samples, k_pos, k_neg)


def evaluate_hyperplane(h: Hyperplane, samples, threshold_rule) -> float:
    """Fraction of samples where classify() agrees with the score labeling.

    ``threshold_rule`` is either a callable score -> {-1, +1} applied to every
    sample, or an already-labeled iterable of (sample, label) pairs (the
    extremes protocol).
    """
    if callable(threshold_rule):
        pairs = [(s, threshold_rule(s.score)) for s in samples]
    else:
        pairs = list(threshold_rule)
    if not pairs:
        raise ValueError("nothing to evaluate")
    hits = sum(1 for s, lbl in pairs if classify(h, s.latent) == lbl)
    return hits / len(pairs)


def train_and_evaluate(samples, cfg: SvmConfig, attribute: str = "") -> tuple[Hyperplane, dict]:
    """Full split protocol: extremes train set, extremes validation, leftover.

    From the pool: the ``pos_count``/``neg_count`` score extremes train the
    plane; the next ``val_count`` extremes (half top, half bottom) of the
    remainder form the validation set; everything left is the "remaining"
    pool, labeled by a score cutoff at the full-pool median (non-extreme
    samples carry no natural labels, so no accuracy target applies there).
    Returns the plane (with accuracies attached) and a report dict.
    """
    samples = list(samples)
    n = len(samples)
    need = cfg.pos_count + cfg.neg_count + cfg.val_count
    if need > n:
        raise ValueError(f"splits need {need} samples, pool has {n}")

    train_pairs = select_extremes(samples, cfg.pos_count, cfg.neg_count)
    taken = {id(s) for s, _ in train_pairs}
    rest = [s for s in samples if id(s) not in taken]

    k_val_pos = cfg.val_count // 2
    k_val_neg = cfg.val_count - k_val_pos
    val_pairs = select_extremes(rest, k_val_pos, k_val_neg)
    taken_val = {id(s) for s, _ in val_pairs}
    remaining = [s for s in rest if id(s) not in taken_val]

    plane = train_svm(train_pairs, cfg)
    train_acc = plane.train_stats.train_accuracy
    val_acc = evaluate_hyperplane(plane, None, val_pairs)
    rem_acc = None
    if remaining:
        cutoff = float(np.median([s.score for s in samples]))
        rem_acc = evaluate_hyperplane(plane, remaining, score_cutoff_rule(cutoff))

    plane = Hyperplane(plane.normal, plane.bias, attribute=attribute,
                       train_stats=TrainStats(val_accuracy=val_acc,
                                              rem_accuracy=rem_acc,
                                              train_accuracy=train_acc))
    report = {
        "n": n,
        "train_pos": cfg.pos_count,
        "train_neg": cfg.neg_count,
        "val": len(val_pairs),
        "remaining": len(remaining),
        "train_accuracy": train_acc,
        "val_accuracy": val_acc,
        "rem_accuracy": rem_acc,
    }
    return plane, report
