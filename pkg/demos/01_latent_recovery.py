"""Recover a latent code from a target image by gradient descent.

We plant a known code z*, render it with the deterministic blob generator,
and watch plain constant-rate descent pull a fresh code toward it. The run
ends with the planted and recovered codes side by side and the loss curve
sampled along the way.

Run:  python demos/01_latent_recovery.py
"""

import numpy as np

from latentwalk import (
    BlobGenerator,
    LatentCode,
    LossWeights,
    RecoveryConfig,
    recover,
)

out_rng = np.random.default_rng(42)

# --- the "unknown" photo: render a planted code ----------------------------
gen = BlobGenerator(dim=8, size=48, seed=7)
z_star = out_rng.uniform(-0.6, 0.6, 8)
target = gen.synthesize(LatentCode(z_star))
print(f"planted code  : {np.round(z_star, 3)}")
print(f"target image  : {target!r}, mean luminance {target.mean():.4f}")

# --- recovery config --------------------------------------------------------
# Pixel-only objective. The generator's latent-space curvature is small
# (bounded pixels, mean-normalized loss), so the pixel weight carries the
# effective step size while eta stays at the conventional 0.05.
cfg = RecoveryConfig(
    weights=LossWeights(lambda1=2500.0, lambda2=0, lambda3=0, lambda4=0,
                        lambda5=0, lambda6=0),
    eta=0.05,
    max_steps=2000,
    init="AVERAGE",
    z_avg=LatentCode(np.zeros(8)),   # the prior mean
    stop_tolerance=0.0,
    seed=0,
)

code, trace = recover(target, gen, cfg)

# --- results ----------------------------------------------------------------
print(f"\nstopped after {trace.steps} steps ({trace.stop_reason}), "
      f"best step {trace.best_step}")
print("loss curve (sampled):")
for step in (0, 10, 50, 200, 800, trace.best_step):
    if step < trace.steps:
        r = trace.records[step]
        print(f"  step {r.step:4d}: pixel loss {r.terms['pixel']:.3e}, "
              f"grad norm {r.grad_norm:.3e}")

err = np.max(np.abs(code.values - z_star))
print(f"\nrecovered code: {np.round(code.values, 3)}")
print(f"|z_hat - z*|_inf = {err:.5f}")
print(f"pixel loss at best iterate = {trace.records[trace.best_step].terms['pixel']:.3e}")
assert err < 0.05, "recovery drifted (should not happen with these settings)"
print("\nrecovery OK: the descent found the planted code.")
