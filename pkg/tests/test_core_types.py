import numpy as np
import pytest

from seqlabel.core import IGNORE, ClassTable, DatasetManifest, ImageRecord, LabelMask, ScoreMap
from seqlabel.errors import InvariantViolation, ValueOutOfRange

from conftest import make_mask, make_record


class TestClassTable:
    def test_six_class_table(self, classes6):
        assert classes6.n_cl == 6
        assert classes6.index_of("hand") == 1
        assert classes6.name_of(0) == "background"

    def test_background_must_be_first(self):
        with pytest.raises(InvariantViolation):
            ClassTable(("hand", "background"))

    def test_duplicate_names_rejected(self):
        with pytest.raises(InvariantViolation):
            ClassTable(("background", "a", "a"))

    def test_empty_name_rejected(self):
        with pytest.raises(InvariantViolation):
            ClassTable(("background", ""))

    def test_class_count_bounds(self):
        with pytest.raises(InvariantViolation):
            ClassTable(("background",))
        with pytest.raises(InvariantViolation):
            ClassTable(("background",) + tuple(f"c{i}" for i in range(255)))
        # 254 classes is the maximum (255 is the ignore value)
        assert ClassTable(("background",) + tuple(f"c{i}" for i in range(254))).n_cl == 254

    def test_unknown_name(self, classes6):
        with pytest.raises(InvariantViolation):
            classes6.index_of("tail")


class TestLabelMask:
    def test_requires_uint8_2d(self):
        with pytest.raises(InvariantViolation):
            LabelMask(np.zeros((2, 2), dtype=np.int32))
        with pytest.raises(InvariantViolation):
            LabelMask(np.zeros((2, 2, 3), dtype=np.uint8))
        with pytest.raises(InvariantViolation):
            LabelMask(np.zeros((0, 4), dtype=np.uint8))

    def test_immutable_after_construction(self):
        mask = make_mask([[0, 1], [2, IGNORE]])
        with pytest.raises(ValueError):
            mask.data[0, 0] = 5

    def test_validate_against_class_table(self, classes6):
        make_mask([[0, 6], [IGNORE, 1]]).validate_classes(classes6)
        with pytest.raises(ValueOutOfRange):
            make_mask([[0, 7]]).validate_classes(classes6)

    def test_equality_is_pixelwise(self):
        assert make_mask([[1, 2]]) == make_mask([[1, 2]])
        assert make_mask([[1, 2]]) != make_mask([[2, 1]])


class TestScoreMap:
    def test_rejects_non_finite(self):
        planes = np.zeros((1, 2, 2), dtype=np.float32)
        planes[0, 0, 0] = np.nan
        with pytest.raises(InvariantViolation):
            ScoreMap(planes)

    def test_rejects_out_of_range(self):
        with pytest.raises(InvariantViolation):
            ScoreMap(np.full((1, 2, 2), 1.5, dtype=np.float32))
        with pytest.raises(InvariantViolation):
            ScoreMap(np.full((1, 2, 2), -0.1, dtype=np.float32))

    def test_plane_lookup_is_one_based(self):
        planes = np.stack([np.zeros((2, 2)), np.ones((2, 2))]).astype(np.float32)
        smap = ScoreMap(planes)
        assert smap.n_cl == 2
        assert smap.plane(2).max() == 1.0
        with pytest.raises(InvariantViolation):
            smap.plane(0)


class TestRecordsAndManifest:
    def test_class_labels_must_be_non_empty(self):
        with pytest.raises(InvariantViolation):
            make_record("a", labels=())

    def test_timestep_non_negative(self):
        with pytest.raises(InvariantViolation):
            make_record("a", timestep=-1)

    def test_duplicate_image_id_names_offender(self, classes6):
        with pytest.raises(InvariantViolation, match="'a'"):
            DatasetManifest(
                classes=classes6,
                images=(make_record("a"), make_record("a", timestep=1)),
            )

    def test_class_index_range_checked(self, classes6):
        with pytest.raises(InvariantViolation):
            DatasetManifest(classes=classes6, images=(make_record("a", labels=(7,)),))

    def test_count_matches_images(self, classes6):
        manifest = DatasetManifest(
            classes=classes6, images=(make_record("a"), make_record("b"))
        )
        assert manifest.count == 2
        assert manifest.by_id("b").id == "b"
