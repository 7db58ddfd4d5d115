"""Crowd annotation aggregation, semantic label propagation, and evaluation.

Thin wrapper around the C++ extension module; see the package README for the
file formats and the `crowdprop` command line tool.
"""

from ._core import (
    AnnotationMatrix,
    EmbeddingTable,
    IoError,
    RelationInventory,
    ValidationError,
    __version__,
    compute_quality_scores,
    cosine_similarity,
    encode_choices,
    load_embeddings,
    nearest_labeled,
    parse_annotations,
    pr_curve,
    propagate_score,
)

__all__ = [
    "AnnotationMatrix",
    "EmbeddingTable",
    "IoError",
    "RelationInventory",
    "ValidationError",
    "__version__",
    "compute_quality_scores",
    "cosine_similarity",
    "encode_choices",
    "load_embeddings",
    "nearest_labeled",
    "parse_annotations",
    "pr_curve",
    "propagate_score",
]
