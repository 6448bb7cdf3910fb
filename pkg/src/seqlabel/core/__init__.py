from .types import IGNORE, MAX_CLASSES, ClassTable, DatasetManifest, ImageRecord, LabelMask, ScoreMap
from .maskio import decode_mask_png, encode_mask_png, read_mask, write_mask
from .scoremapio import decode_scoremap, encode_scoremap, read_scoremap, write_scoremap
from .manifest import load_manifest, manifest_to_doc, parse_manifest, write_manifest
from .images import image_size, load_rgb

__all__ = [
    "IGNORE",
    "MAX_CLASSES",
    "ClassTable",
    "DatasetManifest",
    "ImageRecord",
    "LabelMask",
    "ScoreMap",
    "decode_mask_png",
    "encode_mask_png",
    "read_mask",
    "write_mask",
    "decode_scoremap",
    "encode_scoremap",
    "read_scoremap",
    "write_scoremap",
    "load_manifest",
    "manifest_to_doc",
    "parse_manifest",
    "write_manifest",
    "image_size",
    "load_rgb",
]
