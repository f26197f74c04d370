"""Yat-kernel networks: kernel, layers, attention, training, verification.

The yat product ``<w, x>^2 / (||w - x||^2 + eps)`` is a Mercer kernel that
scores alignment and proximity at once. This package implements it with
analytic gradients, builds Neural Matter Network layers and yat attention
on top, and ships a probe suite that re-checks the kernel's provable
properties numerically.

Submodules are imported lazily so the CLI can pin BLAS threading before
numpy loads.
"""

from __future__ import annotations

import importlib

__version__ = "0.1.0"

_EXPORTS = {
    # linalg
    "ShapeError": "linalg",
    "make_rng": "linalg",
    "gemm": "linalg",
    "row_sq_norms": "linalg",
    "gaussian_fill": "linalg",
    "sym_eig_min": "linalg",
    # kernel
    "KernelConfig": "kernel",
    "SquashConfig": "kernel",
    "yat": "kernel",
    "yat_biased": "kernel",
    "yat_batch": "kernel",
    "yat_grads": "kernel",
    "yat_batch_backward": "kernel",
    "softermax": "kernel",
    "soft_sigmoid": "kernel",
    "soft_tanh": "kernel",
    # layers and blocks
    "Parameter": "layers",
    "NmnDense": "layers",
    "Linear": "layers",
    "LayerNorm": "layers",
    "Gelu": "layers",
    "YatAttention": "attention",
    "AetherBlock": "blocks",
    "StandardBlock": "blocks",
    "Model": "model",
    "save_checkpoint": "checkpoint",
    "load_checkpoint": "checkpoint",
    # training
    "Adam": "optim",
    "softmax_xent": "optim",
    "TrainConfig": "train",
    "MetricsLog": "train",
    "train_classifier": "train",
    "train_lm": "train",
    "invert_prototypes_eval": "train",
    # estimators
    "YatPrototypeClassifier": "estimators",
    "LinearSoftmaxClassifier": "estimators",
    # data
    "Dataset": "data",
    "CharCorpus": "data",
    "load_mnist_idx": "data",
    "xor_dataset": "data",
    "char_tokenize": "data",
    "lm_batches": "data",
    "emit_boundary_grid": "data",
    # probes
    "ProbeReport": "probes",
    "ProbeConfig": "probes",
    "run_all": "probes",
}

__all__ = sorted(_EXPORTS)


def __getattr__(name):
    if name in _EXPORTS:
        module = importlib.import_module(f".{_EXPORTS[name]}", __name__)
        return getattr(module, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


def __dir__():
    return sorted(set(globals()) | set(_EXPORTS))
