"""Sealed stream-processing lab: engine, timing observation, trace
classification and mitigations."""

from ._core import (
    __version__,
    StreamLabError,
    cdf_features,
    flights,
    generate,
    predict,
    qrsr,
    queries,
    query_stages,
    run_query,
    synth_trace,
    train_classifier,
    trim_trace,
)

__all__ = [
    "__version__",
    "StreamLabError",
    "cdf_features",
    "flights",
    "generate",
    "predict",
    "qrsr",
    "queries",
    "query_stages",
    "run_query",
    "synth_trace",
    "train_classifier",
    "trim_trace",
]
