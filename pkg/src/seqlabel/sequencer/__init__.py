from .features import (
    FVE_MAGIC,
    FeatureVector,
    SequencerConfig,
    distance,
    extract_features,
    feature_sidecar_path,
    read_feature_file,
    rgb_histogram,
    write_feature_file,
)
from .sequences import (
    Sequence,
    SequenceSet,
    build_sequences,
    load_sequence_set,
    select_representative,
    sequence_set_to_doc,
    write_sequence_set,
)

__all__ = [
    "FVE_MAGIC",
    "FeatureVector",
    "SequencerConfig",
    "distance",
    "extract_features",
    "feature_sidecar_path",
    "read_feature_file",
    "rgb_histogram",
    "write_feature_file",
    "Sequence",
    "SequenceSet",
    "build_sequences",
    "load_sequence_set",
    "select_representative",
    "sequence_set_to_doc",
    "write_sequence_set",
]
