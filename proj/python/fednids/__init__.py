"""Federated-learning simulator for NetFlow intrusion detection."""

from ._core import (
    ConfigError,
    DataError,
    MetricsError,
    ModelError,
    ModelParameters,
    auc,
    binary_metrics,
    fedavg,
    init_model,
    load_checkpoint,
    load_config,
    predict,
    run_experiment,
    run_synthetic_federated,
    version,
    write_synthetic_datasets,
)

__version__ = version()

__all__ = [
    "ConfigError",
    "DataError",
    "MetricsError",
    "ModelError",
    "ModelParameters",
    "auc",
    "binary_metrics",
    "fedavg",
    "init_model",
    "load_checkpoint",
    "load_config",
    "predict",
    "run_experiment",
    "run_synthetic_federated",
    "version",
    "write_synthetic_datasets",
]
