"""celltrainer: a stdio worker that scores cell-based CNN architectures.

Receives model specs over the cellnas wire protocol (line-delimited JSON),
materializes them into small CNNs, trains on MNIST, CIFAR-10, or a
built-in synthetic dataset, and answers with test accuracy as affinity.
"""

from celltrainer.codes import CellStructure, decode_structure, parse_code
from celltrainer.data import DatasetUnavailable, dataset_names, load_dataset
from celltrainer.network import (
    DatasetMeta,
    RealizedNetwork,
    build_network,
    parameter_shapes,
)
from celltrainer.server import serve
from celltrainer.training import train_and_score

__version__ = "0.1.0"

__all__ = [
    "CellStructure",
    "DatasetMeta",
    "DatasetUnavailable",
    "RealizedNetwork",
    "build_network",
    "dataset_names",
    "decode_structure",
    "load_dataset",
    "parameter_shapes",
    "parse_code",
    "serve",
    "train_and_score",
]
