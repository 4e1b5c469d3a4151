"""Gradient-based competitive layers (base and dual) with CHL topology."""

from .datasets import Dataset, standardize
from .evaluation import cluster_accuracy, prune, valid_prototype_count
from .layers import DeepDgbcModel, DgbcModel, GbcModel, init_model
from .topology import PrototypeSet, chl_edges, loss, loss_gradient, quantization_error
from .training import MetricsTrace, TrainConfig, multi_seed_run, train

__all__ = [
    "Dataset", "standardize", "cluster_accuracy", "prune", "valid_prototype_count",
    "DeepDgbcModel", "DgbcModel", "GbcModel", "init_model", "PrototypeSet", "chl_edges",
    "loss", "loss_gradient", "quantization_error", "MetricsTrace", "TrainConfig",
    "multi_seed_run", "train",
]
