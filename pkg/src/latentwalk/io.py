"""Bit-exact readers and writers for every on-disk interchange artifact.

Images travel as binary PPM (P6) / PGM (P5) with maxval 255 and
round-half-up quantization, so a write-read round trip is within half a
quantization step and idempotent afterwards. Structured data travels as
UTF-8 JSON with full round-trip float precision. Readers validate the owning
type's invariants and name the violated invariant in their error message.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .image import ImageBuffer
from .latent import Hyperplane, LatentCode, LatentSpace, TrainStats
from .losses import LabelVector, LossWeights
from .metrics import FeatureSet
from .hyperplane import ScoredSample
from .recovery import RecoveryConfig, RecoveryTrace

__all__ = [
    "write_image", "read_image",
    "latent_to_dict", "latent_from_dict", "write_latent", "read_latent",
    "hyperplane_to_dict", "hyperplane_from_dict", "write_hyperplane", "read_hyperplane",
    "label_to_dict", "label_from_dict", "write_label", "read_label",
    "write_featset", "read_featset",
    "write_samples_jsonl", "read_samples_jsonl",
    "weights_from_dict", "weights_to_dict",
    "config_from_dict", "config_to_dict", "read_config",
    "read_brisque_model", "write_brisque_model",
    "write_trace", "write_manifest",
]


# ---------------------------------------------------------------------------
# images: PPM (P6) / PGM (P5)


def _quantize(pixels: np.ndarray) -> np.ndarray:
    q = np.floor(pixels * 255.0 + 0.5)
    return np.clip(q, 0.0, 255.0).astype(np.uint8)


def write_image(img: ImageBuffer, path) -> None:
    """Write grayscale as binary PGM, RGB as binary PPM, maxval 255."""
    magic = b"P5" if img.channels == 1 else b"P6"
    header = magic + f"\n{img.width} {img.height}\n255\n".encode("ascii")
    data = _quantize(img.pixels)
    if img.channels == 1:
        data = data[:, :, 0]
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data.tobytes())


def _read_token(data: bytes, pos: int) -> tuple[bytes, int]:
    n = len(data)
    while pos < n:
        if data[pos:pos + 1].isspace():
            pos += 1
        elif data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] != b"\n":
                pos += 1
        else:
            break
    start = pos
    while pos < n and not data[pos:pos + 1].isspace():
        pos += 1
    if start == pos:
        raise ValueError("truncated header")
    return data[start:pos], pos


def read_image(path) -> ImageBuffer:
    """Read a binary PPM/PGM file into an ImageBuffer on [0, 1]."""
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        magic, pos = _read_token(data, 0)
        if magic not in (b"P5", b"P6"):
            raise ValueError(f"unsupported magic {magic!r} (binary PGM/PPM only)")
        wtok, pos = _read_token(data, pos)
        htok, pos = _read_token(data, pos)
        mtok, pos = _read_token(data, pos)
        width, height, maxval = int(wtok), int(htok), int(mtok)
        if maxval != 255:
            raise ValueError(f"maxval must be 255, got {maxval}")
        pos += 1  # single whitespace byte after maxval
        channels = 1 if magic == b"P5" else 3
        need = width * height * channels
        raw = data[pos:pos + need]
        if len(raw) != need:
            raise ValueError(f"expected {need} pixel bytes, found {len(raw)}")
        arr = np.frombuffer(raw, dtype=np.uint8).astype(np.float64) / 255.0
        return ImageBuffer(arr.reshape(height, width, channels))
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# JSON plumbing


def _load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: JSON parse error at line {exc.lineno}, "
                         f"column {exc.colno}: {exc.msg}") from None


def _dump_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def _wrap(path, fn, obj):
    try:
        return fn(obj)
    except (KeyError, TypeError, ValueError) as exc:
        msg = exc.args[0] if exc.args else exc
        raise ValueError(f"{path}: {msg}") from None


# ---------------------------------------------------------------------------
# latent codes


def latent_to_dict(z: LatentCode) -> dict:
    out = {"dim": z.dim, "space": z.space.name}
    if z.space.name == "LAYERED":
        out["layers"] = z.space.layers
    out["values"] = list(z.values)
    out["meta"] = z.meta
    return out


def latent_from_dict(d: dict) -> LatentCode:
    space = LatentSpace(d.get("space", "Z"),
                        d.get("layers") if d.get("space") == "LAYERED" else None)
    values = d["values"]
    declared = d.get("dim")
    if declared is not None and declared != len(values):
        raise ValueError(
            f"declared dim {declared} does not match {len(values)} values")
    return LatentCode(values, space, d.get("meta") or {})


def write_latent(z: LatentCode, path) -> None:
    _dump_json(latent_to_dict(z), path)


def read_latent(path) -> LatentCode:
    return _wrap(path, latent_from_dict, _load_json(path))


# ---------------------------------------------------------------------------
# hyperplanes


def hyperplane_to_dict(h: Hyperplane) -> dict:
    out = {
        "dim": h.dim,
        "normal": list(h.normal),
        "bias": h.bias,
        "attribute": h.attribute,
    }
    stats = h.train_stats
    if stats is not None:
        if stats.val_accuracy is not None:
            out["val_accuracy"] = stats.val_accuracy
        if stats.rem_accuracy is not None:
            out["rem_accuracy"] = stats.rem_accuracy
    return out


def hyperplane_from_dict(d: dict) -> Hyperplane:
    normal = d["normal"]
    declared = d.get("dim")
    if declared is not None and declared != len(normal):
        raise ValueError(
            f"declared dim {declared} does not match {len(normal)} normal entries")
    stats = None
    if "val_accuracy" in d or "rem_accuracy" in d:
        stats = TrainStats(val_accuracy=d.get("val_accuracy"),
                           rem_accuracy=d.get("rem_accuracy"))
    return Hyperplane(normal, float(d.get("bias", 0.0)),
                      d.get("attribute", ""), stats)


def write_hyperplane(h: Hyperplane, path) -> None:
    _dump_json(hyperplane_to_dict(h), path)


def read_hyperplane(path) -> Hyperplane:
    return _wrap(path, hyperplane_from_dict, _load_json(path))


# ---------------------------------------------------------------------------
# label vectors


def label_to_dict(l: LabelVector) -> dict:
    return {"beauty": l.beauty, "identity": list(l.identity)}


def label_from_dict(d: dict) -> LabelVector:
    return LabelVector(d["beauty"], d.get("identity", ()))


def write_label(l: LabelVector, path) -> None:
    _dump_json(label_to_dict(l), path)


def read_label(path) -> LabelVector:
    return _wrap(path, label_from_dict, _load_json(path))


# ---------------------------------------------------------------------------
# feature sets: "FEATSET v1 n d" header + n rows, or a .jsonl of arrays


def write_featset(f: FeatureSet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"FEATSET v1 {f.count} {f.dim}\n")
        for row in f.rows:
            fh.write(" ".join(repr(float(v)) for v in row))
            fh.write("\n")


def read_featset(path) -> FeatureSet:
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline()
        if first.startswith("FEATSET"):
            parts = first.split()
            if len(parts) != 4 or parts[1] != "v1":
                raise ValueError(f"{path}: bad FEATSET header {first.strip()!r}")
            n, d = int(parts[2]), int(parts[3])
            rows = []
            for i in range(n):
                line = fh.readline()
                if not line:
                    raise ValueError(f"{path}: expected {n} rows, file ends at row {i}")
                row = np.array(line.split(), dtype=np.float64)
                if row.size != d:
                    raise ValueError(
                        f"{path}: row {i} has {row.size} values, header says {d}")
                rows.append(row)
            return _wrap(path, FeatureSet, rows)
        # fall back to JSONL: one JSON array per line
        rows = []
        for lineno, line in enumerate([first] + fh.readlines(), start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: JSON parse error at line {lineno}: {exc.msg}") from None
            if not isinstance(row, list):
                raise ValueError(f"{path}: line {lineno} is not a JSON array")
            rows.append(row)
        if not rows:
            raise ValueError(f"{path}: empty feature set")
        if len({len(r) for r in rows}) != 1:
            raise ValueError(f"{path}: rows have inconsistent lengths")
        return _wrap(path, FeatureSet, rows)


# ---------------------------------------------------------------------------
# scored-sample datasets: samples.jsonl (+ optional images/ directory)


def sample_to_dict(s: ScoredSample) -> dict:
    out = {"latent": latent_to_dict(s.latent), "score": s.score}
    if s.image_ref is not None:
        out["image"] = s.image_ref
    return out


def sample_from_dict(d: dict) -> ScoredSample:
    return ScoredSample(latent_from_dict(d["latent"]), float(d["score"]),
                        d.get("image"))


def write_samples_jsonl(samples, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in samples:
            fh.write(json.dumps(sample_to_dict(s)))
            fh.write("\n")


def read_samples_jsonl(path) -> list[ScoredSample]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                d = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(
                    f"{path}: JSON parse error at line {lineno}: {exc.msg}") from None
            out.append(_wrap(f"{path}:{lineno}", sample_from_dict, d))
    if not out:
        raise ValueError(f"{path}: no samples found")
    return out


# ---------------------------------------------------------------------------
# loss weights and recovery configs


_WEIGHT_KEYS = ("lambda1", "lambda2", "lambda3", "lambda4", "lambda5",
                "lambda6", "lambda_ip", "lambda_label")


def weights_to_dict(w: LossWeights) -> dict:
    return {k: getattr(w, k) for k in _WEIGHT_KEYS}


def weights_from_dict(d: dict) -> LossWeights:
    unknown = set(d) - set(_WEIGHT_KEYS)
    if unknown:
        raise ValueError(f"unknown loss-weight keys {sorted(unknown)}")
    return LossWeights(**{k: float(v) for k, v in d.items()})


def config_to_dict(cfg: RecoveryConfig) -> dict:
    init: dict = {"mode": cfg.init}
    if cfg.z_init is not None:
        init["latent"] = latent_to_dict(cfg.z_init)
    if cfg.z_avg is not None:
        init["average"] = latent_to_dict(cfg.z_avg)
    return {
        "weights": weights_to_dict(cfg.weights),
        "eta": cfg.eta,
        "max_steps": cfg.max_steps,
        "init": init,
        "clip": {
            "beauty_range": list(cfg.beauty_range),
            "renormalize_identity": cfg.renormalize_identity,
        },
        "stop_tolerance": cfg.stop_tolerance,
        "seed": cfg.seed,
        "msssim_levels": cfg.msssim_levels,
    }


def config_from_dict(d: dict) -> RecoveryConfig:
    weights = weights_from_dict(d.get("weights", {}))
    init = d.get("init", {})
    clip = d.get("clip", {})
    beauty = clip.get("beauty_range", [0.0, 1.0])
    z_init = latent_from_dict(init["latent"]) if "latent" in init else None
    z_avg = latent_from_dict(init["average"]) if "average" in init else None
    levels = d.get("msssim_levels")
    return RecoveryConfig(
        weights=weights,
        eta=float(d.get("eta", 0.05)),
        max_steps=int(d.get("max_steps", 1000)),
        init=init.get("mode", "AUTO"),
        z_init=z_init,
        z_avg=z_avg,
        beauty_range=(float(beauty[0]), float(beauty[1])),
        renormalize_identity=bool(clip.get("renormalize_identity", True)),
        stop_tolerance=float(d.get("stop_tolerance", 1e-7)),
        seed=int(d.get("seed", 0)),
        msssim_levels=int(levels) if levels is not None else None,
    )


def read_config(path) -> RecoveryConfig:
    return _wrap(path, config_from_dict, _load_json(path))


# ---------------------------------------------------------------------------
# BRISQUE scoring model


def read_brisque_model(path) -> dict:
    d = _load_json(path)
    for key in ("weights", "bias", "feature_min", "feature_max"):
        if key not in d:
            raise ValueError(f"{path}: BRISQUE model is missing {key!r}")
    return d


def write_brisque_model(model: dict, path) -> None:
    _dump_json(model, path)


# ---------------------------------------------------------------------------
# traces and sweep manifests


def write_trace(trace: RecoveryTrace, path) -> None:
    """Line-delimited JSON: one record per step plus a trailing summary."""
    with open(path, "w", encoding="utf-8") as fh:
        for r in trace.records:
            fh.write(json.dumps({
                "step": r.step,
                "total": r.total,
                "terms": r.terms,
                "grad_norm": r.grad_norm,
            }))
            fh.write("\n")
        fh.write(json.dumps({
            "stop_reason": trace.stop_reason,
            "best_step": trace.best_step,
            "best_total": trace.best_total,
        }))
        fh.write("\n")


def write_manifest(entries, path) -> None:
    """Sweep manifest: [{"index", "alpha", "file", "latent"}...]."""
    _dump_json({"frames": list(entries)}, path)


def ensure_dir(path) -> Path:
    p = Path(path)
    os.makedirs(p, exist_ok=True)
    return p
