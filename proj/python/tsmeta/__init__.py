"""Meta-learning recommender for forecasting model selection.

The heavy lifting lives in the compiled ``_core`` extension; this package
re-exports it. Pipeline entry points (``evaluate``, ``features``, ``run``,
``report``) take the same keyword arguments as the JSON config file.
"""

from ._core import (
    ConfigError,
    DataError,
    Model,
    PcaModel,
    TsmetaError,
    evaluate,
    extract_features,
    feature_names,
    features,
    fit_pca,
    forecast,
    learners,
    load_collection,
    mape,
    mase,
    methods,
    oner_weights,
    report,
    run,
    smape,
    train,
)

__all__ = [
    "ConfigError",
    "DataError",
    "Model",
    "PcaModel",
    "TsmetaError",
    "evaluate",
    "extract_features",
    "feature_names",
    "features",
    "fit_pca",
    "forecast",
    "learners",
    "load_collection",
    "mape",
    "mase",
    "methods",
    "oner_weights",
    "report",
    "run",
    "smape",
    "train",
]
