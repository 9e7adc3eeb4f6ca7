"""Experiment runner: config files, dataset ingestion, sweeps, reports."""

from .config import ExperimentConfig, load_config
from .mnist_io import (BadMagicError, CountMismatchError, IdxFormatError,
                       MnistDataset, TruncatedFileError, load_mnist_idx,
                       synthetic_digits, write_idx_images, write_idx_labels)
from .sweep import run_sweep

__all__ = [
    "ExperimentConfig",
    "load_config",
    "MnistDataset",
    "IdxFormatError",
    "BadMagicError",
    "TruncatedFileError",
    "CountMismatchError",
    "load_mnist_idx",
    "synthetic_digits",
    "write_idx_images",
    "write_idx_labels",
    "run_sweep",
]
