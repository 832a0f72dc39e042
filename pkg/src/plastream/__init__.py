"""Streaming piecewise linear approximation with bounded error and compact record protocols."""

from .core import (
    Disjoint,
    InputTuple,
    Joint,
    LineCoefficients,
    ReconstructedTuple,
    SegmentSummary,
    reconstruct,
    segment_from_knots,
    segments_to_knots,
)
from .evaluate import RunConfig, legal_pairings, run_evaluate
from .exceptions import DataError, PLAError
from .methods import METHODS, make_method
from .metrics import aggregate, attribute
from .protocols import PROTOCOLS, Pipeline, decode, decode_bytes, encode

__version__ = "0.1.0"

__all__ = [
    "DataError",
    "Disjoint",
    "InputTuple",
    "Joint",
    "LineCoefficients",
    "METHODS",
    "PLAError",
    "PROTOCOLS",
    "Pipeline",
    "ReconstructedTuple",
    "RunConfig",
    "SegmentSummary",
    "aggregate",
    "attribute",
    "decode",
    "decode_bytes",
    "encode",
    "legal_pairings",
    "make_method",
    "reconstruct",
    "run_evaluate",
    "segment_from_knots",
    "segments_to_knots",
]
