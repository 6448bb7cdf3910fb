import numpy as np
import pytest

from seqlabel.core import IGNORE
from seqlabel.errors import DimensionMismatch, InvariantViolation, NoPixels, NoScorableClass
from seqlabel.metrics import (
    ConfusionMatrix,
    confusion_matrix,
    fw_iou,
    mean_iou,
    metrics_doc,
    per_class_iou,
)

from conftest import make_mask
from oracles import confusion_oracle, iou_oracle


def cm_of(pred, gt, n_total=3, include_background=True):
    return confusion_matrix(make_mask(pred), make_mask(gt), n_total, include_background)


# the worked 2x2 example: gt = [1,1,2,2], pred = [1,2,2,2]
GT = [[1, 1], [2, 2]]
PRED = [[1, 2], [2, 2]]


def test_perfect_prediction_is_diagonal(rng):
    data = rng.integers(0, 3, (5, 5)).astype(np.uint8)
    cm = cm_of(data, data)
    assert (cm.counts == np.diag(np.diag(cm.counts))).all()
    assert cm.counts.sum() == 25


def test_all_ignored_ground_truth():
    cm = cm_of([[1, 2]], [[IGNORE, IGNORE]])
    assert cm.counts.sum() == 0
    assert cm.ignored == 2


def test_hand_tally():
    cm = cm_of(PRED, GT)
    counts, ignored = confusion_oracle(np.asarray(PRED), np.asarray(GT), 3)
    np.testing.assert_array_equal(cm.counts, counts)
    assert cm.counts[1, 1] == 1
    assert cm.counts[1, 2] == 1
    assert cm.counts[2, 2] == 2
    assert ignored == cm.ignored == 0


def test_values_beyond_table_rejected():
    with pytest.raises(InvariantViolation):
        cm_of([[5]], [[1]], n_total=3)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        cm_of([[1]], [[1, 2]])


def test_mean_iou_perfect_is_one(rng):
    data = rng.integers(0, 3, (6, 6)).astype(np.uint8)
    assert mean_iou(cm_of(data, data)) == 1.0


def test_mean_iou_worked_example():
    cm = cm_of(PRED, GT)
    ious = per_class_iou(cm)
    assert ious[1] == pytest.approx(1 / 2, abs=1e-12)
    assert ious[2] == pytest.approx(2 / 3, abs=1e-12)
    assert mean_iou(cm) == pytest.approx(7 / 12, abs=1e-9)
    assert iou_oracle(np.asarray(cm.counts), 1) == pytest.approx(1 / 2, abs=1e-12)


def test_single_scorable_class_scores_one():
    cm = cm_of([[0, 0]], [[0, 0]])
    assert mean_iou(cm) == 1.0
    assert cm.excluded_classes() == [1, 2]


def test_no_scorable_class():
    cm = cm_of([[IGNORE]], [[IGNORE]])
    with pytest.raises(NoScorableClass):
        mean_iou(cm)


def test_fw_iou_perfect_is_one(rng):
    data = rng.integers(0, 3, (6, 6)).astype(np.uint8)
    assert fw_iou(cm_of(data, data)) == 1.0


def test_fw_iou_worked_example():
    cm = cm_of(PRED, GT)
    assert fw_iou(cm) == pytest.approx(7 / 12, abs=1e-9)
    assert fw_iou(cm, literal_paper_formula=True) == pytest.approx(7 / 24, abs=1e-9)


def test_fw_iou_single_class_weight_one():
    # class 1 occupies every gt pixel with IoU 2/3
    cm = cm_of([[1, 1, 0]], [[1, 1, 1]])
    ious = per_class_iou(cm)
    assert fw_iou(cm) == pytest.approx(ious[1], abs=1e-12)


def test_fw_iou_no_pixels():
    cm = cm_of([[IGNORE]], [[IGNORE]])
    with pytest.raises(NoPixels):
        fw_iou(cm)


def test_additivity(rng):
    for _ in range(50):
        gt_a = rng.integers(0, 4, (4, 6)).astype(np.uint8)
        pr_a = rng.integers(0, 4, (4, 6)).astype(np.uint8)
        gt_b = rng.integers(0, 4, (3, 5)).astype(np.uint8)
        pr_b = rng.integers(0, 4, (3, 5)).astype(np.uint8)
        summed = cm_of(pr_a, gt_a, 4) + cm_of(pr_b, gt_b, 4)
        joint = cm_of(
            np.concatenate([pr_a.ravel(), pr_b.ravel()])[None, :],
            np.concatenate([gt_a.ravel(), gt_b.ravel()])[None, :],
            4,
        )
        assert summed == joint


def test_permutation_invariance(rng):
    for _ in range(50):
        gt = rng.choice(np.array([0, 1, 2, IGNORE], dtype=np.uint8), 40)
        pred = rng.choice(np.array([0, 1, 2, IGNORE], dtype=np.uint8), 40)
        perm = rng.permutation(40)
        assert cm_of(pred[None, :], gt[None, :]) == cm_of(pred[perm][None, :], gt[perm][None, :])


def test_bounds(rng):
    for _ in range(50):
        gt = rng.integers(0, 4, (5, 5)).astype(np.uint8)
        pred = rng.integers(0, 4, (5, 5)).astype(np.uint8)
        cm = cm_of(pred, gt, 4)
        for iou in per_class_iou(cm).values():
            assert 0.0 <= iou <= 1.0
        assert 0.0 <= mean_iou(cm) <= 1.0
        assert 0.0 <= fw_iou(cm) <= 1.0


def test_fw_equals_mean_when_frequencies_equal():
    # both classes hold 3 gt pixels; every scorable class equally weighted
    gt = [[1, 1, 1], [2, 2, 2]]
    pred = [[1, 1, 2], [2, 2, 1]]
    cm = cm_of(pred, gt)
    assert fw_iou(cm) == pytest.approx(mean_iou(cm), abs=1e-12)


def test_include_background_toggle():
    gt = [[0, 0, 0, 1]]
    pred = [[0, 0, 1, 1]]
    with_bg = cm_of(pred, gt, include_background=True)
    without_bg = cm_of(pred, gt, include_background=False)
    assert 0 in per_class_iou(with_bg)
    assert 0 not in per_class_iou(without_bg)
    assert mean_iou(with_bg) != mean_iou(without_bg)


def test_matrices_with_different_settings_do_not_add():
    a = cm_of([[1]], [[1]], include_background=True)
    b = cm_of([[1]], [[1]], include_background=False)
    with pytest.raises(InvariantViolation):
        _ = a + b


def test_metrics_doc_structure(classes6):
    gt = [[1, 1], [2, 2]]
    pred = [[1, 2], [2, 2]]
    doc = metrics_doc(confusion_matrix(make_mask(pred), make_mask(gt), 7), classes6.names)
    assert doc["per_class_iou"] == {"hand": 0.5, "arm": pytest.approx(2 / 3)}
    assert doc["mean_iou"] == pytest.approx(7 / 12)
    assert doc["fw_iou"] == pytest.approx(7 / 12)
    assert "background" in doc["excluded_classes"]
    assert doc["pixels_evaluated"] == 4
