"""Minimal RGB decode interface (PNG and baseline JPEG source photos)."""
from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..errors import MissingFile, UndecodableImage


def load_rgb(path: Path | str) -> np.ndarray:
    """Decode an image file to an (H, W, 3) uint8 RGB array."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"image not found: {path}")
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"), dtype=np.uint8)
    except (UnidentifiedImageError, OSError) as exc:
        raise UndecodableImage(f"cannot decode {path}: {exc}") from exc


def image_size(path: Path | str) -> tuple[int, int]:
    """(width, height) from the file header without full decode."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"image not found: {path}")
    try:
        with Image.open(path) as img:
            return img.size
    except (UnidentifiedImageError, OSError) as exc:
        raise UndecodableImage(f"cannot decode {path}: {exc}") from exc
