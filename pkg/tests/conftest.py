import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from seqlabel.core import ClassTable, DatasetManifest, ImageRecord, LabelMask


@pytest.fixture
def classes6():
    return ClassTable(("background", "hand", "arm", "foot", "leg", "torso", "head"))


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def make_mask(values) -> LabelMask:
    return LabelMask(np.asarray(values, dtype=np.uint8))


def make_record(image_id, subject="s00", timestep=0, labels=(1,), image_path=None, **kwargs) -> ImageRecord:
    return ImageRecord(
        id=image_id,
        image_path=Path(image_path) if image_path else Path(f"/nonexistent/{image_id}.png"),
        class_labels=frozenset(labels),
        subject=subject,
        timestep=timestep,
        **kwargs,
    )


def make_manifest(records, n_cl=3) -> DatasetManifest:
    names = ("background",) + tuple(f"c{i}" for i in range(1, n_cl + 1))
    return DatasetManifest(classes=ClassTable(names), images=tuple(records))
