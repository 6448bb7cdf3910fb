import numpy as np
import pytest
from PIL import Image

from seqlabel.errors import (
    BadMagic,
    ConfigInvariantViolation,
    MissingFeatureFile,
    TruncatedFile,
)
from seqlabel.sequencer import (
    FeatureVector,
    SequencerConfig,
    distance,
    extract_features,
    feature_sidecar_path,
    read_feature_file,
    rgb_histogram,
    write_feature_file,
)

from conftest import make_record
from oracles import cosine_distance_oracle, histogram_oracle, l1_distance_oracle


def save_image(path, rgb):
    Image.fromarray(np.asarray(rgb, dtype=np.uint8), mode="RGB").save(path)


def record_for(tmp_path, name, rgb, **kwargs):
    path = tmp_path / f"{name}.png"
    save_image(path, rgb)
    return make_record(name, image_path=path, **kwargs)


def test_uniform_mid_gray_four_bins(tmp_path):
    rgb = np.full((5, 7, 3), 128, dtype=np.uint8)
    rec = record_for(tmp_path, "gray", rgb)
    vec = extract_features(rec, SequencerConfig(histogram_bins=4))
    # hand-binned: 128 * 4 // 256 = bin 2 of each channel, each worth 1/3
    expected = np.zeros(12)
    expected[[2, 6, 10]] = 1.0 / 3.0
    np.testing.assert_allclose(vec.values, expected, atol=1e-12)


def test_identical_pixels_identical_vectors(tmp_path):
    rgb = np.random.default_rng(3).integers(0, 256, (6, 6, 3), dtype=np.uint8)
    rec_a = record_for(tmp_path, "a", rgb)
    rec_b = record_for(tmp_path, "b", rgb)
    config = SequencerConfig()
    assert extract_features(rec_a, config) == extract_features(rec_b, config)


def test_histogram_matches_hand_binned_oracle(rng):
    rgb = rng.integers(0, 256, (9, 4, 3), dtype=np.uint8)
    for bins in (4, 16, 64):
        np.testing.assert_allclose(
            rgb_histogram(rgb, bins), np.asarray(histogram_oracle(rgb, bins)), atol=1e-12
        )


def test_histogram_vectors_are_l1_normalized(rng):
    rgb = rng.integers(0, 256, (8, 8, 3), dtype=np.uint8)
    assert abs(rgb_histogram(rgb, 64).sum() - 1.0) <= 1e-6


def test_feature_vector_normalization_enforced():
    with pytest.raises(ConfigInvariantViolation):
        FeatureVector(np.array([0.5, 0.6]), source="histogram")
    FeatureVector(np.array([0.5, 0.6]), source="external")


def test_external_feature_round_trip(tmp_path):
    values = np.linspace(0, 1, 17, dtype=np.float32)
    path = tmp_path / "img.png.fve"
    write_feature_file(values, path)
    np.testing.assert_array_equal(read_feature_file(path), values.astype(np.float64))


def test_external_source_reads_sidecar(tmp_path):
    rec = record_for(tmp_path, "x", np.zeros((4, 4, 3), dtype=np.uint8))
    write_feature_file(np.array([1.0, 2.0], dtype=np.float32), feature_sidecar_path(rec))
    vec = extract_features(rec, SequencerConfig(feature_source="external_file"))
    assert vec.source == "external"
    np.testing.assert_array_equal(vec.values, [1.0, 2.0])


def test_missing_sidecar(tmp_path):
    rec = record_for(tmp_path, "x", np.zeros((4, 4, 3), dtype=np.uint8))
    with pytest.raises(MissingFeatureFile):
        extract_features(rec, SequencerConfig(feature_source="external_file"))


def test_feature_file_errors(tmp_path):
    bad = tmp_path / "bad.fve"
    bad.write_bytes(b"XXXX\x02\x00\x00\x00" + b"\x00" * 8)
    with pytest.raises(BadMagic):
        read_feature_file(bad)
    short = tmp_path / "short.fve"
    short.write_bytes(b"FVE1\x04\x00\x00\x00" + b"\x00" * 4)
    with pytest.raises(TruncatedFile):
        read_feature_file(short)


def test_config_invariants():
    with pytest.raises(ConfigInvariantViolation):
        SequencerConfig(split_threshold=-0.1)
    with pytest.raises(ConfigInvariantViolation):
        SequencerConfig(histogram_bins=1)
    with pytest.raises(ConfigInvariantViolation):
        SequencerConfig(distance="euclid")


class TestDistance:
    def vec(self, vals):
        return FeatureVector(np.asarray(vals, dtype=np.float64), source="external")

    def test_matches_oracles(self, rng):
        for _ in range(50):
            a = rng.random(8)
            b = rng.random(8)
            assert distance(self.vec(a), self.vec(b), "l1") == pytest.approx(
                l1_distance_oracle(a, b), abs=1e-12
            )
            assert distance(self.vec(a), self.vec(b), "cosine") == pytest.approx(
                cosine_distance_oracle(a, b), abs=1e-12
            )

    def test_identical_vectors_have_zero_distance(self):
        v = self.vec([0.2, 0.8])
        assert distance(v, v, "cosine") == 0.0
        assert distance(v, v, "l1") == 0.0

    def test_zero_norm_conventions(self):
        zero = self.vec([0.0, 0.0])
        one = self.vec([1.0, 0.0])
        assert distance(zero, zero, "cosine") == 0.0
        assert distance(zero, one, "cosine") == 1.0
