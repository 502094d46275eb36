import json

import numpy as np
import pytest

from latentwalk import io as lwio
from latentwalk.cli import main
from latentwalk.image import ImageBuffer
from latentwalk.latent import LatentCode
from latentwalk.losses import LabelVector, LossWeights
from latentwalk.recovery import RecoveryConfig
from latentwalk.toys import BlobGenerator

GEN = "blob:d=8,size=24,seed=7"


def run(*argv):
    return main(list(argv))


def write_plant_config(path, max_steps=600):
    cfg = RecoveryConfig(
        weights=LossWeights(lambda1=2500.0, lambda2=0, lambda3=0, lambda4=0,
                            lambda5=0, lambda6=0),
        eta=0.05, max_steps=max_steps, init="ZERO", stop_tolerance=0.0, seed=0)
    with open(path, "w") as fh:
        json.dump(lwio.config_to_dict(cfg), fh)


@pytest.fixture
def target_image(tmp_path):
    gen = BlobGenerator(dim=8, size=24, seed=7)
    z_star = np.random.default_rng(3).uniform(-0.6, 0.6, 8)
    img = gen.synthesize(LatentCode(z_star))
    path = tmp_path / "target.pgm"
    lwio.write_image(img, path)
    return path, z_star


class TestSampleDataset:
    def test_smoke_and_rerun_identical(self, tmp_path):
        out1, out2 = tmp_path / "d1", tmp_path / "d2"
        args = ["sample-dataset", "--generator", GEN,
                "--scorer", "latentlinear:seed=3,dim=8",
                "-n", "50", "--seed", "4"]
        assert run(*args, "--out", str(out1)) == 0
        assert run(*args, "--out", str(out2)) == 0
        assert (out1 / "samples.jsonl").read_bytes() == (out2 / "samples.jsonl").read_bytes()

    def test_save_images_layout(self, tmp_path):
        out = tmp_path / "d"
        assert run("sample-dataset", "--generator", GEN, "--scorer", "brightness",
                   "-n", "3", "--seed", "1", "--out", str(out), "--save-images") == 0
        samples = lwio.read_samples_jsonl(out / "samples.jsonl")
        assert samples[0].image_ref == "images/000000.ppm"
        assert (out / "images" / "000002.ppm").is_file()

    def test_jobs_ordering_independent(self, tmp_path):
        out1, out2 = tmp_path / "j1", tmp_path / "j2"
        base = ["sample-dataset", "--generator", GEN, "--scorer", "brightness",
                "-n", "20", "--seed", "9"]
        assert run(*base, "--out", str(out1), "--jobs", "1") == 0
        assert run(*base, "--out", str(out2), "--jobs", "4") == 0
        assert (out1 / "samples.jsonl").read_bytes() == (out2 / "samples.jsonl").read_bytes()

    def test_missing_out_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run("sample-dataset", "--generator", GEN, "--scorer", "brightness",
                "-n", "3")
        assert exc.value.code == 2


class TestTrainHyperplane:
    def make_dataset(self, tmp_path, n=400):
        out = tmp_path / "ds"
        assert run("sample-dataset", "--generator", GEN,
                   "--scorer", "latentlinear:seed=3,dim=8",
                   "-n", str(n), "--seed", "2", "--out", str(out)) == 0
        return out

    def test_trains_and_reports(self, tmp_path, capsys):
        ds = self.make_dataset(tmp_path)
        out = tmp_path / "plane.json"
        code = run("train-hyperplane", "--dataset", str(ds), "--pos", "60",
                   "--neg", "60", "--val", "40", "--seed", "0",
                   "--reg", "0.01", "--out", str(out))
        assert code == 0
        printed = capsys.readouterr().out
        assert "val accuracy" in printed
        plane = lwio.read_hyperplane(out)
        assert plane.train_stats.val_accuracy >= 0.9

    def test_determinism(self, tmp_path):
        ds = self.make_dataset(tmp_path)
        o1, o2 = tmp_path / "p1.json", tmp_path / "p2.json"
        args = ["train-hyperplane", "--dataset", str(ds), "--pos", "60",
                "--neg", "60", "--val", "40", "--seed", "0"]
        assert run(*args, "--out", str(o1)) == 0
        assert run(*args, "--out", str(o2)) == 0
        assert o1.read_bytes() == o2.read_bytes()

    def test_counts_exceeding_dataset(self, tmp_path, capsys):
        ds = self.make_dataset(tmp_path, n=100)
        code = run("train-hyperplane", "--dataset", str(ds), "--pos", "60",
                   "--neg", "60", "--val", "40", "--out", str(tmp_path / "p.json"))
        assert code == 2
        assert "splits need" in capsys.readouterr().err


class TestRecover:
    def test_plant_and_recover(self, tmp_path, target_image, capsys):
        target, z_star = target_image
        cfg = tmp_path / "cfg.json"
        write_plant_config(cfg)
        out = tmp_path / "z.json"
        trace = tmp_path / "trace.jsonl"
        code = run("recover", "--image", str(target), "--generator", GEN,
                   "--config", str(cfg), "--out", str(out), "--trace", str(trace))
        assert code == 0
        z_hat = lwio.read_latent(out)
        assert np.max(np.abs(z_hat.values - z_star)) < 0.05
        lines = trace.read_text().strip().splitlines()
        first = json.loads(lines[0])
        assert first["step"] == 0 and "pixel" in first["terms"]
        summary = json.loads(lines[-1])
        assert summary["stop_reason"] in ("CONVERGED", "MAX_STEPS")
        best_pixel = min(json.loads(l)["terms"]["pixel"] for l in lines[:-1])
        assert best_pixel < 1e-4

    def test_zero_eta_returns_init(self, tmp_path, target_image):
        target, _ = target_image
        cfg = tmp_path / "cfg.json"
        write_plant_config(cfg, max_steps=1)
        out = tmp_path / "z.json"
        code = run("recover", "--image", str(target), "--generator", GEN,
                   "--config", str(cfg), "--out", str(out), "--eta", "0.0")
        assert code == 0
        assert np.array_equal(lwio.read_latent(out).values, np.zeros(8))

    def test_bad_image_path(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        write_plant_config(cfg)
        code = run("recover", "--image", str(tmp_path / "nope.pgm"),
                   "--generator", GEN, "--config", str(cfg),
                   "--out", str(tmp_path / "z.json"))
        assert code == 2
        assert "no such file" in capsys.readouterr().err

    def test_rerun_byte_identical(self, tmp_path, target_image):
        target, _ = target_image
        cfg = tmp_path / "cfg.json"
        write_plant_config(cfg, max_steps=50)
        outs = []
        for name in ("a", "b"):
            out = tmp_path / f"{name}.json"
            tr = tmp_path / f"{name}.trace"
            assert run("recover", "--image", str(target), "--generator", GEN,
                       "--config", str(cfg), "--out", str(out),
                       "--trace", str(tr)) == 0
            outs.append((out.read_bytes(), tr.read_bytes()))
        assert outs[0] == outs[1]


class TestEdit:
    def make_inputs(self, tmp_path):
        z = LatentCode(np.random.default_rng(4).uniform(-0.8, 0.8, 8))
        zp = tmp_path / "z.json"
        lwio.write_latent(z, zp)
        n = np.random.default_rng(5).standard_normal(8)
        from latentwalk.latent import Hyperplane
        hp = tmp_path / "h.json"
        lwio.write_hyperplane(Hyperplane(n / np.linalg.norm(n)), hp)
        return zp, hp

    def test_default_sweep_eleven_frames(self, tmp_path):
        zp, hp = self.make_inputs(tmp_path)
        out = tmp_path / "frames"
        code = run("edit", "--latent", str(zp), "--hyperplane", str(hp),
                   "--start", "0.0", "--end", "3.0", "--step", "0.3",
                   "--generator", GEN, "--out", str(out))
        assert code == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert len(manifest["frames"]) == 11
        assert (out / "frame_000_alpha_0.000.ppm").is_file()
        assert (out / "frame_010_alpha_3.000.ppm").is_file()

    def test_single_frame_when_start_equals_end(self, tmp_path):
        zp, hp = self.make_inputs(tmp_path)
        out = tmp_path / "frames"
        assert run("edit", "--latent", str(zp), "--hyperplane", str(hp),
                   "--start", "0.0", "--end", "0.0", "--step", "0.3",
                   "--generator", GEN, "--out", str(out)) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert len(manifest["frames"]) == 1

    def test_nonpositive_step_exit_2(self, tmp_path):
        zp, hp = self.make_inputs(tmp_path)
        code = run("edit", "--latent", str(zp), "--hyperplane", str(hp),
                   "--step", "0.0", "--generator", GEN,
                   "--out", str(tmp_path / "f"))
        assert code == 2

    def test_rerun_byte_identical(self, tmp_path):
        zp, hp = self.make_inputs(tmp_path)
        outs = []
        for name in ("f1", "f2"):
            out = tmp_path / name
            assert run("edit", "--latent", str(zp), "--hyperplane", str(hp),
                       "--start", "0.0", "--end", "0.9", "--step", "0.3",
                       "--generator", GEN, "--out", str(out), "--jobs", "2") == 0
            blob = b"".join(sorted(p.read_bytes() for p in out.iterdir()))
            outs.append(blob)
        assert outs[0] == outs[1]


class TestBeautifyConditional:
    def make_inputs(self, tmp_path):
        rng = np.random.default_rng(6)
        zp = tmp_path / "z.json"
        lwio.write_latent(LatentCode(rng.uniform(-0.8, 0.8, 8)), zp)
        beta = rng.standard_normal(8)
        lp = tmp_path / "l.json"
        lwio.write_label(LabelVector(0.4, beta / np.linalg.norm(beta)), lp)
        return zp, lp

    def test_single_frame_reproduces_reconstruction(self, tmp_path):
        zp, lp = self.make_inputs(tmp_path)
        out = tmp_path / "frames"
        code = run("beautify-conditional", "--latent", str(zp), "--label", str(lp),
                   "--alpha-step", "0.05", "--frames", "1",
                   "--generator", "condblob:d=8,size=24,beta_dim=8,seed=7",
                   "--out", str(out))
        assert code == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert len(manifest["frames"]) == 1
        assert manifest["frames"][0]["alpha"] == 0.4

    def test_monotone_brightness_and_truncation(self, tmp_path, capsys):
        zp, lp = self.make_inputs(tmp_path)
        out = tmp_path / "frames"
        code = run("beautify-conditional", "--latent", str(zp), "--label", str(lp),
                   "--alpha-step", "0.1", "--frames", "9",
                   "--generator", "condblob:d=8,size=24,beta_dim=8,seed=7",
                   "--out", str(out))
        assert code == 0
        err = capsys.readouterr().err
        assert "truncated" in err  # 0.4 + 8*0.1 = 1.2 > 1.0
        manifest = json.loads((out / "manifest.json").read_text())
        assert len(manifest["frames"]) == 7
        means = [lwio.read_image(out / e["file"]).mean() for e in manifest["frames"]]
        assert np.all(np.diff(means) >= 0.0)


class TestMetricsCommands:
    def test_fid_identical_files_zero(self, tmp_path, rng, capsys):
        from latentwalk.metrics import FeatureSet
        f = FeatureSet(rng.standard_normal((20, 4)))
        path = tmp_path / "f.featset"
        lwio.write_featset(f, path)
        assert run("fid", str(path), str(path)) == 0
        value = float(capsys.readouterr().out.strip())
        assert value <= 1e-8

    def test_fid_planted_gaussian_closed_form(self, tmp_path, capsys):
        rng = np.random.default_rng(0)
        n = 200_000
        a = rng.standard_normal((n, 2))
        b = rng.standard_normal((n, 2)) + np.array([1.0, 0.0])
        from latentwalk.metrics import FeatureSet, frechet_distance, gaussian_stats
        # closed form holds exactly for the fitted stats
        pa, pb = tmp_path / "a.featset", tmp_path / "b.featset"
        lwio.write_featset(FeatureSet(a[:500]), pa)
        lwio.write_featset(FeatureSet(b[:500]), pb)
        assert run("fid", str(pa), str(pb), "--report", str(tmp_path / "r.json")) == 0
        value = float(capsys.readouterr().out.strip())
        oracle = frechet_distance(gaussian_stats(FeatureSet(a[:500])),
                                  gaussian_stats(FeatureSet(b[:500])))
        assert value == pytest.approx(oracle, abs=1e-12)
        report = json.loads((tmp_path / "r.json").read_text())
        assert report["value"] == value

    def test_fid_image_dirs(self, tmp_path, capsys):
        gen = BlobGenerator(dim=8, size=24, seed=7)
        rng = np.random.default_rng(1)
        for name, shift in (("da", 0.0), ("db", 0.5)):
            d = tmp_path / name
            d.mkdir()
            for i in range(6):
                img = gen.synthesize(LatentCode(rng.uniform(-1, 1, 8) + shift))
                lwio.write_image(img, d / f"{i:03d}.pgm")
        assert run("fid", str(tmp_path / "da"), str(tmp_path / "db")) == 0
        value = float(capsys.readouterr().out.strip())
        assert np.isfinite(value) and value > 0.0

    def test_identity_distance_self_zero(self, tmp_path, capsys):
        gen = BlobGenerator(dim=8, size=32, seed=7)
        img = gen.synthesize(LatentCode(np.zeros(8)))
        path = tmp_path / "i.pgm"
        lwio.write_image(img, path)
        assert run("identity-distance", str(path), str(path)) == 0
        assert float(capsys.readouterr().out.strip()) == 0.0

    def test_identity_distance_featsets(self, tmp_path, capsys):
        from latentwalk.metrics import FeatureSet
        rows = np.eye(3)
        pa, pb = tmp_path / "a.featset", tmp_path / "b.featset"
        lwio.write_featset(FeatureSet(rows), pa)
        lwio.write_featset(FeatureSet(rows), pb)
        assert run("identity-distance", str(pa), str(pb)) == 0
        assert float(capsys.readouterr().out.strip()) == 0.0

    def test_brisque_score_and_features(self, tmp_path, capsys):
        rng = np.random.default_rng(2)
        img = ImageBuffer(np.clip(0.5 + 0.1 * rng.standard_normal((48, 48, 1)), 0, 1))
        ip = tmp_path / "i.pgm"
        lwio.write_image(img, ip)
        model = {"weights": [0.0] * 36, "bias": 2.5,
                 "feature_min": [0.0] * 36, "feature_max": [1.0] * 36}
        mp = tmp_path / "m.json"
        lwio.write_brisque_model(model, mp)
        fout = tmp_path / "f.featset"
        assert run("brisque", "--image", str(ip), "--model", str(mp),
                   "--features-out", str(fout)) == 0
        assert float(capsys.readouterr().out.strip()) == 2.5
        feats = lwio.read_featset(fout)
        assert feats.count == 1 and feats.dim == 36

    def test_brisque_without_model_or_out_is_usage_error(self, tmp_path, capsys):
        gen = BlobGenerator(dim=8, size=32, seed=7)
        ip = tmp_path / "i.pgm"
        lwio.write_image(gen.synthesize(LatentCode(np.zeros(8))), ip)
        assert run("brisque", "--image", str(ip)) == 2


class TestUsage:
    def test_unknown_flag_exit_2(self):
        with pytest.raises(SystemExit) as exc:
            run("fid", "a", "b", "--wat")
        assert exc.value.code == 2

    def test_help_available(self, capsys):
        for cmd in ("sample-dataset", "train-hyperplane", "recover", "edit",
                    "beautify-conditional", "fid", "brisque", "identity-distance"):
            with pytest.raises(SystemExit) as exc:
                run(cmd, "--help")
            assert exc.value.code == 0
