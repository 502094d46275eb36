import hashlib

import numpy as np
import pytest

from conftest import rel_err

from latentwalk.image import ImageBuffer
from latentwalk.latent import LatentCode
from latentwalk.losses import LabelVector
from latentwalk.toys import (
    BlobGenerator,
    BrightnessScorer,
    LatentLinearScorer,
    ToyConditionalGenerator,
    ToyCritic,
    ToyEmbedder,
    make_toy,
    parse_model_spec,
)

# sha256 of the quantized seed-7, z=0 render; frozen after manual inspection
GOLDEN_BLOB_SHA = "6b27f69d6bc3b3be8cc23fda855fc1a857421c87220697780f8d99a98cc5163f"


def quantized_sha(img):
    q = np.floor(img.pixels * 255.0 + 0.5).clip(0, 255).astype(np.uint8)
    return hashlib.sha256(q.tobytes()).hexdigest()


def gen_vjp_fd(synth, z, upstream, h=1e-5):
    g = np.zeros_like(z)
    for i in range(z.size):
        zp, zm = z.copy(), z.copy()
        zp[i] += h
        zm[i] -= h
        g[i] = (np.sum(synth(zp).pixels * upstream)
                - np.sum(synth(zm).pixels * upstream)) / (2 * h)
    return g


class TestBlobGenerator:
    def test_deterministic_same_seed(self, rng):
        g1 = BlobGenerator(dim=8, size=32, seed=7)
        g2 = BlobGenerator(dim=8, size=32, seed=7)
        z = LatentCode(rng.standard_normal(8))
        assert g1.synthesize(z) == g2.synthesize(z)

    def test_golden_hash(self):
        gen = BlobGenerator(dim=8, size=64, seed=7)
        img = gen.synthesize(LatentCode(np.zeros(8)))
        assert quantized_sha(img) == GOLDEN_BLOB_SHA

    def test_dim_must_be_multiple_of_four(self):
        with pytest.raises(ValueError, match="multiple of 4"):
            BlobGenerator(dim=6)

    def test_output_range(self, rng):
        gen = BlobGenerator(dim=8, size=24, seed=3)
        for _ in range(5):
            img = gen.synthesize(LatentCode(rng.standard_normal(8)))
            assert img.pixels.min() >= 0.0 and img.pixels.max() < 1.0

    def test_vjp_matches_fd(self, rng):
        gen = BlobGenerator(dim=8, size=16, seed=7)
        z = rng.uniform(-1.0, 1.0, 8)
        upstream = rng.standard_normal((16, 16, 1))
        g = gen.vjp(LatentCode(z), upstream)
        gfd = gen_vjp_fd(lambda zv: gen.synthesize(LatentCode(zv)), z, upstream)
        assert rel_err(g, gfd) < 1e-4

    def test_vjp_matches_fd_rgb(self, rng):
        gen = BlobGenerator(dim=8, size=16, channels=3, seed=7)
        z = rng.uniform(-1.0, 1.0, 8)
        upstream = rng.standard_normal((16, 16, 3))
        g = gen.vjp(LatentCode(z), upstream)
        gfd = gen_vjp_fd(lambda zv: gen.synthesize(LatentCode(zv)), z, upstream)
        assert rel_err(g, gfd) < 1e-4

    def test_injective_on_operating_box(self):
        # pairs separated in latent space must stay separated in pixel space
        gen = BlobGenerator(dim=8, size=32, seed=7)
        rng = np.random.default_rng(99)
        checked = 0
        while checked < 1000:
            z1 = rng.uniform(-2.0, 2.0, 8)
            z2 = rng.uniform(-2.0, 2.0, 8)
            if np.max(np.abs(z1 - z2)) <= 0.1:
                continue
            d = gen.synthesize(LatentCode(z1)).pixels - gen.synthesize(LatentCode(z2)).pixels
            assert np.linalg.norm(d) > 1e-4
            checked += 1


class TestConditionalGenerator:
    def test_brightness_strictly_increasing_in_alpha(self, rng):
        cgen = ToyConditionalGenerator(dim=8, size=24, beta_dim=8, seed=7)
        z = LatentCode(rng.standard_normal(8))
        beta = rng.standard_normal(8)
        beta /= np.linalg.norm(beta)
        means = [cgen.synthesize(z, LabelVector(a, beta)).mean()
                 for a in np.linspace(0.0, 1.0, 9)]
        assert np.all(np.diff(means) > 0.0)

    def test_vjp_matches_fd(self, rng):
        cgen = ToyConditionalGenerator(dim=8, size=16, beta_dim=6, seed=7)
        z = rng.uniform(-1.0, 1.0, 8)
        beta = rng.standard_normal(6)
        beta /= np.linalg.norm(beta)
        alpha = 0.55
        upstream = rng.standard_normal((16, 16, 1))
        zg, lg = cgen.vjp(LatentCode(z), LabelVector(alpha, beta), upstream)

        zgfd = gen_vjp_fd(
            lambda zv: cgen.synthesize(LatentCode(zv), LabelVector(alpha, beta)),
            z, upstream)
        assert rel_err(zg, zgfd) < 1e-4

        concat = np.concatenate([[alpha], beta])
        lgfd = np.zeros_like(concat)
        h = 1e-6
        for i in range(concat.size):
            cp, cm = concat.copy(), concat.copy()
            cp[i] += h
            cm[i] -= h
            fp = np.sum(cgen.synthesize(LatentCode(z), cp).pixels * upstream)
            fm = np.sum(cgen.synthesize(LatentCode(z), cm).pixels * upstream)
            lgfd[i] = (fp - fm) / (2 * h)
        assert rel_err(lg, lgfd) < 1e-3

    def test_identical_labels_identical_frames(self, rng):
        cgen = ToyConditionalGenerator(dim=8, size=16, beta_dim=4, seed=2)
        z = LatentCode(rng.standard_normal(8))
        beta = np.array([1.0, 0.0, 0.0, 0.0])
        a = cgen.synthesize(z, LabelVector(0.37, beta))
        b = cgen.synthesize(z, LabelVector(0.37, beta))
        assert a == b


class TestScorers:
    def test_latent_linear_is_exact_dot(self, rng):
        sc = LatentLinearScorer(dim=8, seed=3)
        z = rng.standard_normal(8)
        assert sc.score(None, LatentCode(z)) == pytest.approx(float(sc.direction @ z))
        assert not sc.needs_image

    def test_brightness_in_unit_interval(self, rng):
        sc = BrightnessScorer()
        gen = BlobGenerator(dim=8, size=16, seed=1)
        img = gen.synthesize(LatentCode(rng.standard_normal(8)))
        assert 0.0 <= sc.score(img) <= 1.0


class TestEmbedderAndCritic:
    def test_embedding_unit_norm(self, rng):
        emb = ToyEmbedder()
        gen = BlobGenerator(dim=8, size=32, seed=4)
        for _ in range(5):
            v = emb.embed(gen.synthesize(LatentCode(rng.standard_normal(8))))
            assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-9)

    def test_flat_image_canonical_vector(self):
        emb = ToyEmbedder()
        v = emb.embed(ImageBuffer(np.full((16, 16, 1), 0.5)))
        expected = np.zeros(64)
        expected[0] = 1.0
        assert np.array_equal(v, expected)

    def test_critic_deterministic(self, rng):
        crit = ToyCritic(seed=11)
        img = ImageBuffer(rng.uniform(0.1, 0.9, (8, 8, 1)))
        assert crit.score(img) == crit.score(img)


class TestFactory:
    def test_same_seed_same_instance_bytes(self):
        a = make_toy("blob", seed=5, params={"d": 8, "size": 16})
        b = make_toy("blob", seed=5, params={"d": 8, "size": 16})
        z = LatentCode(np.linspace(-1, 1, 8))
        assert a.synthesize(z) == b.synthesize(z)

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="unknown toy kind"):
            make_toy("resnet", seed=1)

    def test_bad_params(self):
        with pytest.raises(ValueError, match="multiple of 4"):
            make_toy("blob", params={"d": 6})
        with pytest.raises(ValueError, match="unknown parameters"):
            make_toy("blob", params={"wat": 1})

    def test_parse_model_spec(self):
        gen = parse_model_spec("blob:d=8,size=32,seed=9")
        assert isinstance(gen, BlobGenerator)
        assert gen.latent_dim == 8 and gen.image_shape == (32, 32, 1)
        sc = parse_model_spec("latentlinear:seed=3,dim=8")
        assert isinstance(sc, LatentLinearScorer)
        assert isinstance(parse_model_spec("brightness"), BrightnessScorer)
        with pytest.raises(ValueError):
            parse_model_spec("blob:d")
