"""latentwalk: latent-space recovery, linear attribute editing and image metrics.

The package walks the full loop around a deterministic generator model:

* recover a latent code from a target image by multi-term gradient descent
  (:mod:`latentwalk.recovery`, :mod:`latentwalk.losses`),
* separate a scalar attribute with a linear hyperplane trained on scored
  latent samples (:mod:`latentwalk.hyperplane`, :mod:`latentwalk.latent`),
* synthesize edited image sequences by walking along the hyperplane normal
  or a conditioning score (:mod:`latentwalk.editing`),
* evaluate results with from-scratch metrics: Frechet feature distance,
  BRISQUE spatial-quality features and embedding identity distance
  (:mod:`latentwalk.metrics`).

Everything runs at desk scale against the analytic toy models in
:mod:`latentwalk.toys`; real models plug in through the small Generator /
FeatureExtractor / Scorer / Embedder interfaces or through the interchange
file formats in :mod:`latentwalk.io`.
"""

from .image import ImageBuffer
from .latent import EditStep, Hyperplane, LatentCode, classify, distance, edit
from .losses import (
    ConvBankExtractor,
    LabelVector,
    LaplacianPerceptual,
    LossWeights,
    aggregate_recovery_loss,
    adv_generator_loss,
    critic_loss,
    feature_l1,
    generator_total_loss,
    identity_cross_entropy,
    label_l1,
    latent_penalty,
    msssim_loss,
    perceptual_loss,
    pixel_logcosh,
    score_controller,
)
from .recovery import (
    RecoveryConfig,
    RecoveryTrace,
    finite_difference_vjp,
    recover,
    recover_conditional,
    stochastic_clip,
)
from .hyperplane import (
    ScoredSample,
    SvmConfig,
    evaluate_hyperplane,
    sample_dataset,
    select_extremes,
    train_svm,
)
from .editing import advisory_range, beautify_conditional, sweep
from .linalg import jacobi_eigh, sym_matrix_sqrt
from .metrics import (
    FeatureSet,
    GaussianStats,
    aggd_fit,
    brisque_features,
    brisque_score,
    frechet_distance,
    gaussian_stats,
    identity_distance,
)
from .toys import (
    BlobGenerator,
    BrightnessScorer,
    LatentLinearScorer,
    ToyConditionalGenerator,
    ToyCritic,
    ToyEmbedder,
    make_toy,
)

__version__ = "0.1.0"

__all__ = [
    "ImageBuffer",
    "LatentCode", "Hyperplane", "EditStep", "distance", "edit", "classify",
    "LossWeights", "LabelVector", "ConvBankExtractor", "LaplacianPerceptual",
    "pixel_logcosh", "feature_l1", "msssim_loss", "perceptual_loss",
    "latent_penalty", "critic_loss", "label_l1", "aggregate_recovery_loss",
    "adv_generator_loss", "identity_cross_entropy", "generator_total_loss",
    "score_controller",
    "RecoveryConfig", "RecoveryTrace", "recover", "recover_conditional",
    "stochastic_clip", "finite_difference_vjp",
    "ScoredSample", "SvmConfig", "sample_dataset", "select_extremes",
    "train_svm", "evaluate_hyperplane",
    "sweep", "beautify_conditional", "advisory_range",
    "jacobi_eigh", "sym_matrix_sqrt",
    "FeatureSet", "GaussianStats", "gaussian_stats", "frechet_distance",
    "brisque_features", "aggd_fit", "brisque_score", "identity_distance",
    "BlobGenerator", "ToyConditionalGenerator", "LatentLinearScorer",
    "BrightnessScorer", "ToyEmbedder", "ToyCritic", "make_toy",
]
