"""Grouping images into sequences of similar, temporally adjacent images.

Images are first grouped by (subject, image-level class-label set), each
group is ordered by (timestep, id), and a new sequence starts whenever the
feature distance between timestep-adjacent images exceeds the split
threshold. One representative (the medoid) is selected per sequence to
receive the manual annotation.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from ..core.types import DatasetManifest
from ..errors import DimensionMismatch, InvariantViolation, MalformedManifest, MissingFile
from .features import FeatureVector, SequencerConfig, distance


@dataclass(frozen=True)
class Sequence:
    """Ordered group of image ids sharing one manual annotation."""

    id: str
    image_ids: tuple[str, ...]
    representative_id: str
    class_labels: frozenset[int] = frozenset()

    def __post_init__(self):
        if not self.image_ids:
            raise InvariantViolation(f"sequence {self.id!r} has no members")
        if len(set(self.image_ids)) != len(self.image_ids):
            raise InvariantViolation(f"sequence {self.id!r} has duplicate members")
        if self.representative_id not in self.image_ids:
            raise InvariantViolation(
                f"sequence {self.id!r}: representative {self.representative_id!r} is not a member"
            )


@dataclass(frozen=True)
class SequenceSet:
    sequences: tuple[Sequence, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "sequences", tuple(self.sequences))
        seen: set[str] = set()
        ids: set[str] = set()
        for seq in self.sequences:
            if seq.id in ids:
                raise InvariantViolation(f"duplicate sequence id {seq.id!r}")
            ids.add(seq.id)
            for img in seq.image_ids:
                if img in seen:
                    raise InvariantViolation(f"image {img!r} appears in more than one sequence")
                seen.add(img)

    @property
    def n(self) -> int:
        return len(self.sequences)

    def image_ids(self) -> set[str]:
        return {img for seq in self.sequences for img in seq.image_ids}

    def by_id(self, sequence_id: str) -> Sequence:
        for seq in self.sequences:
            if seq.id == sequence_id:
                return seq
        raise InvariantViolation(f"unknown sequence id {sequence_id!r}")


def _safe_token(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", text)


def select_representative(
    sequence_image_ids: list[str] | tuple[str, ...],
    features: Mapping[str, FeatureVector],
    metric: str,
) -> str:
    """Medoid member: minimal sum of distances to the others; ties go to the
    lexicographically smallest id."""
    best_id = None
    best_sum = None
    for i in sorted(sequence_image_ids):
        total = sum(
            distance(features[i], features[j], metric)
            for j in sequence_image_ids
            if j != i
        )
        if best_sum is None or total < best_sum:
            best_id, best_sum = i, total
    return best_id


def build_sequences(
    manifest: DatasetManifest,
    features: Mapping[str, FeatureVector],
    config: SequencerConfig,
) -> SequenceSet:
    """Partition manifest images into sequences; deterministic for fixed inputs."""
    dims = {features[rec.id].values.shape[0] for rec in manifest.images}
    if len(dims) > 1:
        raise DimensionMismatch(f"feature vectors have mixed dimensions: {sorted(dims)}")

    groups: dict[tuple[str, tuple[int, ...]], list] = {}
    for rec in manifest.images:
        groups.setdefault((rec.subject, tuple(sorted(rec.class_labels))), []).append(rec)

    sequences = []
    for (subject, labels), records in sorted(groups.items()):
        records.sort(key=lambda r: (r.timestep, r.id))
        runs: list[list] = [[records[0]]]
        for prev, cur in zip(records, records[1:]):
            gap = distance(features[prev.id], features[cur.id], config.distance)
            if gap > config.split_threshold:
                runs.append([cur])
            else:
                runs[-1].append(cur)
        prefix = f"{_safe_token(subject)}-c{'_'.join(str(c) for c in labels)}"
        for k, run in enumerate(runs):
            ids = tuple(r.id for r in run)
            sequences.append(
                Sequence(
                    id=f"{prefix}-{k:03d}",
                    image_ids=ids,
                    representative_id=select_representative(ids, features, config.distance),
                    class_labels=frozenset(labels),
                )
            )
    return SequenceSet(tuple(sequences))


def sequence_set_to_doc(sset: SequenceSet) -> dict:
    return {
        "sequences": [
            {
                "id": seq.id,
                "image_ids": list(seq.image_ids),
                "representative_id": seq.representative_id,
            }
            for seq in sset.sequences
        ]
    }


def write_sequence_set(sset: SequenceSet, path: Path | str) -> None:
    doc = sequence_set_to_doc(sset)
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_sequence_set(path: Path | str) -> SequenceSet:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"sequence file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedManifest(f"{path}: invalid JSON: {exc.msg}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("sequences"), list):
        raise MalformedManifest(f"{path}: expected object with a 'sequences' array")
    sequences = []
    for i, entry in enumerate(doc["sequences"]):
        if not isinstance(entry, dict):
            raise MalformedManifest(f"{path}: sequences[{i}] must be an object")
        try:
            sequences.append(
                Sequence(
                    id=entry["id"],
                    image_ids=tuple(entry["image_ids"]),
                    representative_id=entry["representative_id"],
                )
            )
        except KeyError as exc:
            raise MalformedManifest(f"{path}: sequences[{i}] missing key {exc}") from exc
    return SequenceSet(tuple(sequences))
