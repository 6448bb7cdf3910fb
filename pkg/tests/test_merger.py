import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqlabel.core import IGNORE, LabelMask
from seqlabel.errors import AnnotationHasIgnorePixels, DimensionMismatch
from seqlabel.merger import merge_labels, propagate_sequence
from seqlabel.sequencer import Sequence

from conftest import make_mask
from oracles import merge_rule_oracle


def test_annotated_class_is_never_overwritten():
    y_ps, _ = merge_labels(make_mask([[4]]), make_mask([[2]]))
    assert y_ps.data[0, 0] == 4


def test_cam_fills_annotation_background():
    y_ps, _ = merge_labels(make_mask([[0]]), make_mask([[3]]))
    assert y_ps.data[0, 0] == 3


def test_cam_ignore_never_overwrites():
    y_ps, _ = merge_labels(make_mask([[0]]), make_mask([[IGNORE]]))
    assert y_ps.data[0, 0] == 0


def test_4x4_fixture_matches_oracle():
    y_s = np.zeros((4, 4), dtype=np.uint8)
    y_s[:, :2] = 1  # left half annotated class 1
    y_p = np.full((4, 4), IGNORE, dtype=np.uint8)
    y_p[:2, 2:] = 2  # top-right quadrant CAM class 2
    y_ps, report = merge_labels(make_mask(y_s), make_mask(y_p))

    np.testing.assert_array_equal(y_ps.data, merge_rule_oracle(y_s, y_p))
    assert (y_ps.data[:, :2] == 1).all()
    assert (y_ps.data[:2, 2:] == 2).all()
    assert (y_ps.data[2:, 2:] == 0).all()
    assert report.pixels_from_cam == 4
    assert report.pixels_from_sequence == 12
    assert report.per_class_added == {2: 4}
    assert report.ignored_pixels == 12


def test_report_counts_partition_the_raster(rng):
    y_s = rng.integers(0, 3, (9, 7)).astype(np.uint8)
    y_p = rng.choice(np.array([0, 1, 2, IGNORE], dtype=np.uint8), (9, 7))
    _, report = merge_labels(make_mask(y_s), make_mask(y_p))
    assert report.pixels_from_sequence + report.pixels_from_cam == 63


def test_annotation_with_ignore_rejected():
    with pytest.raises(AnnotationHasIgnorePixels):
        merge_labels(make_mask([[IGNORE]]), make_mask([[0]]))


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        merge_labels(make_mask([[0]]), make_mask([[0, 0]]))


def test_neutral_element():
    y_s = make_mask([[0, 1], [2, 0]])
    y_ps, report = merge_labels(y_s, make_mask([[0, 0], [0, 0]]))
    assert y_ps == y_s
    assert report.pixels_from_cam == 0


def test_strict_class_set_blocks_annotated_classes():
    y_s = make_mask([[1, 0]])
    y_p = make_mask([[0, 1]])
    default, _ = merge_labels(y_s, y_p)
    strict, _ = merge_labels(y_s, y_p, strict_class_set=True)
    assert default.data[0, 1] == 1  # pixel-membership reading fills the gap
    assert strict.data[0, 1] == 0  # class-set reading blocks class 1 entirely
    np.testing.assert_array_equal(strict.data, merge_rule_oracle(y_s.data, y_p.data, strict_class_set=True))


def test_propagate_ignore_opt_in():
    y_s = make_mask([[0, 2]])
    y_p = make_mask([[IGNORE, IGNORE]])
    default, _ = merge_labels(y_s, y_p)
    assert default.data[0, 0] == 0
    kept, report = merge_labels(y_s, y_p, propagate_ignore=True)
    assert kept.data[0, 0] == IGNORE
    assert kept.data[0, 1] == 2  # annotated class still wins
    assert report.pixels_from_cam == 1


@settings(max_examples=200, deadline=None)
@given(
    shape=st.tuples(st.integers(1, 8), st.integers(1, 8)),
    seed=st.integers(0, 2**31 - 1),
    strict=st.booleans(),
)
def test_merge_properties(shape, seed, strict):
    rng = np.random.default_rng(seed)
    h, w = shape
    y_s = make_mask(rng.integers(0, 7, (h, w)).astype(np.uint8))
    y_p = make_mask(
        rng.choice(np.array(list(range(7)) + [IGNORE], dtype=np.uint8), (h, w))
    )
    y_ps, _ = merge_labels(y_s, y_p, strict_class_set=strict)

    # pointwise provenance
    assert np.all((y_ps.data == y_s.data) | (y_ps.data == y_p.data))
    # annotation dominance
    annotated = y_s.data != 0
    assert np.array_equal(y_ps.data[annotated], y_s.data[annotated])
    # gap-filling only
    changed = y_ps.data != y_s.data
    assert np.all(y_s.data[changed] == 0)
    assert np.all((y_ps.data[changed] >= 1) & (y_ps.data[changed] != IGNORE))
    # idempotence
    again, _ = merge_labels(y_ps, y_p, strict_class_set=strict)
    assert again == y_ps
    # oracle equivalence
    np.testing.assert_array_equal(y_ps.data, merge_rule_oracle(y_s.data, y_p.data, strict))


class TestPropagateSequence:
    def seq(self, ids, rep):
        return Sequence(id="s", image_ids=tuple(ids), representative_id=rep)

    def test_singleton_returns_annotation(self):
        ann = make_mask([[1, 0]])
        result = propagate_sequence(self.seq(["a"], "a"), ann, {})
        assert result.outputs == {"a": ann}
        assert result.warnings == ()

    def test_all_background_cam_yields_annotation(self):
        ann = make_mask([[1, 0]])
        cams = {"b": make_mask([[0, 0]])}
        result = propagate_sequence(self.seq(["a", "b"], "a"), ann, cams)
        assert result.outputs["b"] == ann

    def test_three_member_sequence_matches_oracle(self, rng):
        ann = make_mask(rng.integers(0, 4, (6, 6)).astype(np.uint8))
        cams = {
            name: make_mask(rng.choice(np.array([0, 1, 2, 3, IGNORE], dtype=np.uint8), (6, 6)))
            for name in ("b", "c")
        }
        result = propagate_sequence(self.seq(["a", "b", "c"], "a"), ann, cams)
        assert result.outputs["a"] == ann
        for name in ("b", "c"):
            np.testing.assert_array_equal(
                result.outputs[name].data, merge_rule_oracle(ann.data, cams[name].data)
            )
            assert result.reports[name].pixels_from_cam >= 0

    def test_missing_cam_label_falls_back_with_warning(self):
        ann = make_mask([[2]])
        result = propagate_sequence(self.seq(["a", "b"], "a"), ann, {})
        assert result.outputs["b"] == ann
        assert any("b" in w for w in result.warnings)

    def test_dimension_mismatch_collected_per_image(self):
        ann = make_mask([[2]])
        cams = {"b": make_mask([[1, 1]]), "c": make_mask([[3]])}
        result = propagate_sequence(self.seq(["a", "b", "c"], "a"), ann, cams)
        assert "b" in result.errors
        assert result.outputs["c"] == make_mask([[2]])
        assert "b" not in result.outputs
