"""Inductive node embeddings with dual encoders and bi-attention."""

from ._core import (
    ConfigError,
    DataError,
    Graph,
    Model,
    NumericError,
    ShapeError,
    average_precision,
    default_config,
    embed,
    evaluate,
    fit,
    gradcheck,
    load_dataset,
    load_model,
    micro_f1,
    roc_auc,
    run_cli,
)

__all__ = [
    "ConfigError",
    "DataError",
    "Graph",
    "Model",
    "NumericError",
    "ShapeError",
    "average_precision",
    "default_config",
    "embed",
    "evaluate",
    "fit",
    "gradcheck",
    "load_dataset",
    "load_model",
    "micro_f1",
    "roc_auc",
    "run_cli",
]
