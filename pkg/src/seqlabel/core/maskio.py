"""Label mask codec: 8-bit single-channel grayscale PNG.

0 = background, 1..n_cl = classes, 255 = ignore. Round-trips are
bit-for-bit identities.
"""
from __future__ import annotations

import io
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..errors import MissingFile, UnsupportedPng
from .types import ClassTable, LabelMask


def encode_mask_png(mask: LabelMask) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(mask.data, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def decode_mask_png(data: bytes, classes: Optional[ClassTable] = None) -> LabelMask:
    try:
        img = Image.open(io.BytesIO(data))
        img.load()
    except (UnidentifiedImageError, OSError) as exc:
        raise UnsupportedPng(f"not a decodable PNG: {exc}") from exc
    if img.format != "PNG":
        raise UnsupportedPng(f"expected PNG, got {img.format}")
    if img.mode != "L":
        raise UnsupportedPng(
            f"expected 8-bit single-channel grayscale, got mode {img.mode!r}"
        )
    mask = LabelMask(np.asarray(img, dtype=np.uint8))
    if classes is not None:
        mask.validate_classes(classes)
    return mask


def read_mask(path: Path | str, classes: Optional[ClassTable] = None) -> LabelMask:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"mask file not found: {path}")
    return decode_mask_png(path.read_bytes(), classes)


def write_mask(mask: LabelMask, path: Path | str) -> None:
    Path(path).write_bytes(encode_mask_png(mask))
