"""Dataset manifest codec (UTF-8 JSON).

Top-level keys: "classes" (array of names, element 0 = "background") and
"images" (array of records). Relative paths are resolved against the
manifest's directory on load and re-relativized on write, so workspaces
stay relocatable.
"""
from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any, Optional

from ..errors import InvariantViolation, MalformedManifest, MissingFile
from .types import ClassTable, DatasetManifest, ImageRecord


def _require(obj: dict, key: str, kind, where: str):
    if key not in obj:
        raise MalformedManifest(f"{where}: missing required key {key!r}")
    value = obj[key]
    if not isinstance(value, kind):
        raise MalformedManifest(
            f"{where}.{key}: expected {getattr(kind, '__name__', kind)}, got {type(value).__name__}"
        )
    return value


def _resolve(base: Path, value: Any, where: str) -> Path:
    if not isinstance(value, str) or not value:
        raise MalformedManifest(f"{where}: expected non-empty path string")
    p = Path(value)
    return p if p.is_absolute() else (base / p)


def parse_manifest(doc: Any, base_dir: Path) -> DatasetManifest:
    if not isinstance(doc, dict):
        raise MalformedManifest(f"top level must be an object, got {type(doc).__name__}")
    class_names = _require(doc, "classes", list, "manifest")
    if not all(isinstance(n, str) for n in class_names):
        raise MalformedManifest("manifest.classes: every entry must be a string")
    classes = ClassTable(tuple(class_names))

    records = []
    for i, entry in enumerate(_require(doc, "images", list, "manifest")):
        where = f"images[{i}]"
        if not isinstance(entry, dict):
            raise MalformedManifest(f"{where}: expected object, got {type(entry).__name__}")
        image_id = _require(entry, "id", str, where)
        label_names = _require(entry, "class_labels", list, where)
        if not all(isinstance(n, str) for n in label_names):
            raise MalformedManifest(f"{where}.class_labels: every entry must be a string")
        labels = frozenset(classes.index_of(n) for n in label_names)
        if 0 in labels:
            raise InvariantViolation(f"{where}: 'background' is not an image-level label")
        timestep = _require(entry, "timestep", int, where)
        if isinstance(timestep, bool):
            raise MalformedManifest(f"{where}.timestep: expected integer, got bool")
        records.append(
            ImageRecord(
                id=image_id,
                image_path=_resolve(base_dir, entry["image_path"], f"{where}.image_path")
                if "image_path" in entry
                else _require(entry, "image_path", str, where),
                class_labels=labels,
                subject=_require(entry, "subject", str, where),
                timestep=timestep,
                scoremap_path=_resolve(base_dir, entry["scoremap_path"], f"{where}.scoremap_path")
                if entry.get("scoremap_path") is not None
                else None,
                gt_mask_path=_resolve(base_dir, entry["gt_mask_path"], f"{where}.gt_mask_path")
                if entry.get("gt_mask_path") is not None
                else None,
            )
        )
    return DatasetManifest(classes=classes, images=tuple(records))


def load_manifest(path: Path | str) -> DatasetManifest:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"manifest not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedManifest(
            f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    return parse_manifest(doc, path.parent.resolve())


def manifest_to_doc(manifest: DatasetManifest, base_dir: Optional[Path] = None) -> dict:
    """JSON document form; paths relativized against base_dir when given."""

    def rel(p: Optional[Path]) -> Optional[str]:
        if p is None:
            return None
        if base_dir is None:
            return str(p)
        return os.path.relpath(p, base_dir)

    images = []
    for rec in manifest.images:
        entry = {
            "id": rec.id,
            "image_path": rel(rec.image_path),
            "class_labels": [manifest.classes.name_of(c) for c in sorted(rec.class_labels)],
            "subject": rec.subject,
            "timestep": rec.timestep,
        }
        if rec.scoremap_path is not None:
            entry["scoremap_path"] = rel(rec.scoremap_path)
        if rec.gt_mask_path is not None:
            entry["gt_mask_path"] = rel(rec.gt_mask_path)
        images.append(entry)
    return {"classes": list(manifest.classes.names), "images": images}


def write_manifest(manifest: DatasetManifest, path: Path | str) -> None:
    path = Path(path)
    doc = manifest_to_doc(manifest, base_dir=path.parent.resolve())
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
