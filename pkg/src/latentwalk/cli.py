"""Command-line surface wiring the pipeline end to end.

Subcommands mirror the pipeline stages: sample a scored latent dataset,
train the attribute hyperplane, recover a latent from an image, render edit
sweeps and conditional ramps, and evaluate with fid / brisque /
identity-distance. Every command is deterministic under a fixed --seed.

Exit codes: 0 success, 1 runtime failure, 2 usage error (bad arguments,
missing files, inconsistent counts).
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import io as lwio
from .editing import advisory_range, sweep_offsets
from .hyperplane import SvmConfig, draw_latents, train_and_evaluate
from .image import ImageBuffer
from .latent import LatentCode, edit
from .losses import ConvBankExtractor, LaplacianPerceptual
from .metrics import (
    FeatureSet,
    brisque_features,
    brisque_score,
    frechet_distance,
    gaussian_stats,
    identity_distance,
)
from .hyperplane import ScoredSample
from .recovery import recover
from .toys import ToyEmbedder, parse_model_spec

__all__ = ["main"]


class UsageError(Exception):
    """Bad arguments or unusable inputs: exit code 2."""


def _existing_file(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such file: {path}")
    return p


def _existing_dir(path: str) -> Path:
    p = Path(path)
    if not p.is_dir():
        raise UsageError(f"no such directory: {path}")
    return p


def _model(spec: str, want: type, what: str):
    try:
        model = parse_model_spec(spec)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not isinstance(model, want):
        raise UsageError(f"{what} spec {spec!r} built a {type(model).__name__}")
    return model


def _write_report(path, payload) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")


# ---------------------------------------------------------------------------
# sample-dataset


def _cmd_sample_dataset(args) -> int:
    from .hyperplane import Scorer
    from .recovery import Generator

    gen = _model(args.generator, Generator, "generator")
    scorer = _model(args.scorer, Scorer, "scorer")
    out = lwio.ensure_dir(args.out)
    images_dir = None
    if args.save_images:
        images_dir = lwio.ensure_dir(out / "images")

    zs = draw_latents(gen.latent_dim, args.n, args.seed)
    need_image = scorer.needs_image or args.save_images

    def build(i: int):
        z = LatentCode(zs[i], gen.latent_space)
        image = gen.synthesize(z) if need_image else None
        try:
            score = float(scorer.score(image if scorer.needs_image else None, z))
        except Exception as exc:
            raise RuntimeError(f"scorer failed on sample {i}: {exc}") from exc
        ref = None
        if images_dir is not None:
            ref = f"images/{i:06d}.ppm"
            lwio.write_image(image, out / ref)
        return ScoredSample(z, score, ref)

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            samples = list(pool.map(build, range(args.n)))
    else:
        samples = [build(i) for i in range(args.n)]

    lwio.write_samples_jsonl(samples, out / "samples.jsonl")
    print(f"wrote {args.n} samples to {out / 'samples.jsonl'}")
    return 0


# ---------------------------------------------------------------------------
# train-hyperplane


def _cmd_train_hyperplane(args) -> int:
    dataset = _existing_dir(args.dataset)
    samples_path = dataset / "samples.jsonl"
    if not samples_path.is_file():
        raise UsageError(f"dataset has no samples.jsonl: {dataset}")
    samples = lwio.read_samples_jsonl(samples_path)
    if args.pos + args.neg + args.val > len(samples):
        raise UsageError(
            f"splits need {args.pos + args.neg + args.val} samples, "
            f"dataset has {len(samples)}")
    cfg = SvmConfig(epochs=args.epochs, reg=args.reg, seed=args.seed,
                    pos_count=args.pos, neg_count=args.neg, val_count=args.val)
    plane, report = train_and_evaluate(samples, cfg, attribute=args.attribute)
    lwio.write_hyperplane(plane, args.out)
    print(f"train accuracy: {report['train_accuracy']:.6f}")
    print(f"val accuracy: {report['val_accuracy']:.6f}")
    if report["rem_accuracy"] is not None:
        print(f"remaining accuracy: {report['rem_accuracy']:.6f}")
    print(f"wrote hyperplane to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# recover


def _cmd_recover(args) -> int:
    from .recovery import Generator

    target = lwio.read_image(_existing_file(args.image))
    cfg = lwio.read_config(_existing_file(args.config))
    overrides = {}
    if args.eta is not None:
        overrides["eta"] = args.eta
    if args.max_steps is not None:
        overrides["max_steps"] = args.max_steps
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        from dataclasses import replace
        cfg = replace(cfg, **overrides)
    gen = _model(args.generator, Generator, "generator")

    extractor = ConvBankExtractor(seed=0) if cfg.weights.lambda2 > 0 else None
    perceptual = LaplacianPerceptual() if cfg.weights.lambda4 > 0 else None
    if cfg.weights.lambda6 > 0:
        raise UsageError("the critic term has no CLI plug-in; set lambda6 to 0")

    code, trace = recover(target, gen, cfg, extractor=extractor, perceptual=perceptual)
    lwio.write_latent(code, args.out)
    if args.trace:
        lwio.write_trace(trace, args.trace)
    best = trace.records[trace.best_step]
    per_term = " ".join(f"{k}={v:.6g}" for k, v in sorted(best.terms.items()))
    print(f"best step {best.step}: total={best.total:.6g} {per_term} "
          f"({trace.stop_reason}, {trace.steps} steps)")
    print(f"wrote latent to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# edit


def _cmd_edit(args) -> int:
    from .recovery import Generator

    z = lwio.read_latent(_existing_file(args.latent))
    plane = lwio.read_hyperplane(_existing_file(args.hyperplane))
    gen = _model(args.generator, Generator, "generator")
    try:
        offsets = sweep_offsets(args.start, args.end, args.step)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    bound = advisory_range("hyperplane")
    if max(abs(args.start), abs(args.end)) > bound:
        print(f"warning: sweep exceeds the advisory realism range +-{bound}",
              file=sys.stderr)

    out = lwio.ensure_dir(args.out)

    def render(item):
        index, alpha = item
        zed = edit(z, plane, alpha)
        img = gen.synthesize(zed)
        stem = f"frame_{index:03d}_alpha_{alpha:.3f}"
        lwio.write_image(img, out / f"{stem}.ppm")
        lwio.write_latent(zed, out / f"{stem}.latent.json")
        return {"index": index, "alpha": alpha, "file": f"{stem}.ppm",
                "latent": f"{stem}.latent.json"}

    items = list(enumerate(offsets))
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            entries = list(pool.map(render, items))
    else:
        entries = [render(it) for it in items]
    lwio.write_manifest(entries, out / "manifest.json")
    print(f"wrote {len(entries)} frames to {out}")
    return 0


# ---------------------------------------------------------------------------
# beautify-conditional


def _cmd_beautify_conditional(args) -> int:
    from .editing import beautify_conditional
    from .recovery import ConditionalGenerator

    z = lwio.read_latent(_existing_file(args.latent))
    label = lwio.read_label(_existing_file(args.label))
    cgen = _model(args.generator, ConditionalGenerator, "generator")
    if args.frames < 1:
        raise UsageError("--frames must be >= 1")
    if args.alpha_step < 0.0:
        raise UsageError("--alpha-step must be >= 0")
    if args.alpha_step > advisory_range("conditional"):
        print(f"warning: alpha step exceeds the advisory realism increment "
              f"{advisory_range('conditional')}", file=sys.stderr)

    alphas = [label.beauty + i * args.alpha_step for i in range(args.frames)]
    kept = [a for a in alphas if a <= 1.0 + 1e-12]
    if len(kept) < len(alphas):
        print(f"warning: truncated {len(alphas) - len(kept)} frame(s) beyond "
              f"beauty score 1.0", file=sys.stderr)
    kept = [min(a, 1.0) for a in kept]

    frames = beautify_conditional(z, label.beauty, label.identity, kept, cgen)
    out = lwio.ensure_dir(args.out)
    entries = []
    for i, (a, img) in enumerate(zip(kept, frames)):
        stem = f"frame_{i:03d}_alpha_{a:.3f}"
        lwio.write_image(img, out / f"{stem}.ppm")
        entries.append({"index": i, "alpha": a, "file": f"{stem}.ppm"})
    lwio.write_manifest(entries, out / "manifest.json")
    print(f"wrote {len(entries)} frames to {out}")
    return 0


# ---------------------------------------------------------------------------
# metrics commands


_IMAGE_SUFFIXES = (".ppm", ".pgm")


def _dir_features(path: Path) -> FeatureSet:
    """Built-in features for raw image directories: 8x8 block-mean luminance."""
    files = sorted(p for p in path.iterdir()
                   if p.suffix.lower() in _IMAGE_SUFFIXES)
    if not files:
        raise UsageError(f"no .ppm/.pgm images in {path}")
    embedder = _PoolFeatures()
    return FeatureSet([embedder(lwio.read_image(p)) for p in files])


class _PoolFeatures:
    def __init__(self, grid: int = 8):
        self.grid = grid

    def __call__(self, img: ImageBuffer) -> np.ndarray:
        g = img.gray()
        h, w = g.shape
        rows = (np.arange(h) * self.grid) // h
        cols = (np.arange(w) * self.grid) // w
        pooled = np.zeros((self.grid, self.grid))
        counts = np.zeros((self.grid, self.grid))
        np.add.at(pooled, (rows[:, None].repeat(w, 1), cols[None, :].repeat(h, 0)), g)
        np.add.at(counts, (rows[:, None].repeat(w, 1), cols[None, :].repeat(h, 0)), 1.0)
        return (pooled / counts).ravel()


def _features_arg(arg: str) -> FeatureSet:
    p = Path(arg)
    if p.is_dir():
        return _dir_features(p)
    if p.is_file():
        return lwio.read_featset(p)
    raise UsageError(f"no such file or directory: {arg}")


def _cmd_fid(args) -> int:
    fa = _features_arg(args.a)
    fb = _features_arg(args.b)
    if fa.dim != fb.dim:
        raise UsageError(f"feature dims differ: {fa.dim} vs {fb.dim}")
    value = frechet_distance(gaussian_stats(fa), gaussian_stats(fb))
    print(repr(value))
    _write_report(args.report, {"command": "fid", "a": args.a, "b": args.b,
                                "n_a": fa.count, "n_b": fb.count,
                                "dim": fa.dim, "value": value})
    return 0


def _cmd_brisque(args) -> int:
    img = lwio.read_image(_existing_file(args.image))
    feats = brisque_features(img)
    if args.model is None and args.features_out is None:
        raise UsageError("brisque needs --model (to score) or --features-out "
                         "(to export the 36-vector)")
    payload = {"command": "brisque", "image": args.image}
    if args.features_out:
        lwio.write_featset(FeatureSet(feats[None, :]), args.features_out)
        payload["features_file"] = args.features_out
    value = None
    if args.model:
        model = lwio.read_brisque_model(_existing_file(args.model))
        value = brisque_score(feats, model)
        payload["value"] = value
        print(repr(value))
    else:
        print(" ".join(repr(float(v)) for v in feats))
    _write_report(args.report, payload)
    return 0


def _cmd_identity_distance(args) -> int:
    pa, pb = Path(args.a), Path(args.b)
    for p in (pa, pb):
        if not p.is_file():
            raise UsageError(f"no such file: {p}")
    if pa.suffix.lower() in _IMAGE_SUFFIXES:
        embedder = _model(args.embedder, ToyEmbedder, "embedder") \
            if args.embedder else ToyEmbedder()
        value = identity_distance(lwio.read_image(pa), lwio.read_image(pb), embedder)
    else:
        fa = lwio.read_featset(pa)
        fb = lwio.read_featset(pb)
        if fa.count != fb.count or fa.dim != fb.dim:
            raise UsageError(
                f"embedding files must pair up: {fa.count}x{fa.dim} vs {fb.count}x{fb.dim}")
        value = float(np.mean(np.linalg.norm(fa.rows - fb.rows, axis=1)))
    print(repr(value))
    _write_report(args.report, {"command": "identity-distance",
                                "a": args.a, "b": args.b, "value": value})
    return 0


# ---------------------------------------------------------------------------
# parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latentwalk",
        description="Latent recovery, attribute editing and evaluation metrics.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample-dataset",
                       help="draw scored latent samples from a generator")
    p.add_argument("--generator", required=True,
                   help="model spec, e.g. blob:d=8,size=64,seed=7")
    p.add_argument("--scorer", required=True,
                   help="scorer spec, e.g. latentlinear:seed=3,dim=8 or brightness")
    p.add_argument("-n", type=int, required=True, help="sample count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--save-images", action="store_true",
                   help="also write images/NNNNNN.ppm")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_sample_dataset)

    p = sub.add_parser("train-hyperplane",
                       help="train the attribute hyperplane on score extremes")
    p.add_argument("--dataset", required=True)
    p.add_argument("--pos", type=int, default=5600)
    p.add_argument("--neg", type=int, default=5600)
    p.add_argument("--val", type=int, default=4800)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--reg", type=float, default=1e-4)
    p.add_argument("--attribute", default="beauty")
    p.add_argument("--out", required=True, help="output hyperplane JSON")
    p.set_defaults(func=_cmd_train_hyperplane)

    p = sub.add_parser("recover", help="recover a latent code from an image")
    p.add_argument("--image", required=True)
    p.add_argument("--generator", required=True)
    p.add_argument("--config", required=True, help="recovery config JSON")
    p.add_argument("--out", required=True, help="output latent JSON")
    p.add_argument("--trace", help="write per-step JSONL trace here")
    p.add_argument("--eta", type=float, help="override config eta")
    p.add_argument("--max-steps", type=int, help="override config step budget")
    p.add_argument("--seed", type=int, help="override config seed")
    p.set_defaults(func=_cmd_recover)

    p = sub.add_parser("edit", help="sweep a latent along a hyperplane normal")
    p.add_argument("--latent", required=True)
    p.add_argument("--hyperplane", required=True)
    p.add_argument("--start", type=float, default=0.0)
    p.add_argument("--end", type=float, default=3.0)
    p.add_argument("--step", type=float, default=0.3)
    p.add_argument("--generator", required=True)
    p.add_argument("--out", required=True, help="output frame directory")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_edit)

    p = sub.add_parser("beautify-conditional",
                       help="re-render a recovered code at rising beauty scores")
    p.add_argument("--latent", required=True)
    p.add_argument("--label", required=True, help="label JSON (beauty + identity)")
    p.add_argument("--alpha-step", type=float, default=0.05)
    p.add_argument("--frames", type=int, required=True)
    p.add_argument("--generator", required=True,
                   help="conditional model spec, e.g. condblob:d=8,beta_dim=8")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_beautify_conditional)

    p = sub.add_parser("fid", help="Frechet distance between two feature sets")
    p.add_argument("a", help="FeatureSet file or image directory "
                             "(directories use built-in 8x8 pooled features)")
    p.add_argument("b")
    p.add_argument("--report", help="write a JSON report here")
    p.set_defaults(func=_cmd_fid)

    p = sub.add_parser("brisque", help="BRISQUE features / score of one image")
    p.add_argument("--image", required=True)
    p.add_argument("--model", help="scoring model JSON")
    p.add_argument("--features-out", help="write the 36-vector as a FEATSET file")
    p.add_argument("--report")
    p.set_defaults(func=_cmd_brisque)

    p = sub.add_parser("identity-distance",
                       help="embedding L2 distance between two images")
    p.add_argument("a", help="image file or embedding FeatureSet file")
    p.add_argument("b")
    p.add_argument("--embedder", help="embedder spec (default: embedder:grid=8)")
    p.add_argument("--report")
    p.set_defaults(func=_cmd_identity_distance)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
