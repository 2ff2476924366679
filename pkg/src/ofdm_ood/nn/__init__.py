"""Dense-tensor layer, differentiation and optimizer substrate (torch-backed)."""

from .checkpoint import Checkpoint, CheckpointError, load_module_tensors, module_tensors
from .layers import (
    KINDS,
    Layer,
    LayerSpec,
    ShapeError,
    build_layer,
    conv_out_len,
    forward,
    named_layers,
    output_shape,
    tconv_out_len,
)
from .optim import Optimizer, OptimizerConfig, backward, optimizer_step

__all__ = [
    "KINDS",
    "Checkpoint",
    "CheckpointError",
    "Layer",
    "LayerSpec",
    "Optimizer",
    "OptimizerConfig",
    "ShapeError",
    "backward",
    "build_layer",
    "conv_out_len",
    "forward",
    "load_module_tensors",
    "module_tensors",
    "named_layers",
    "optimizer_step",
    "output_shape",
    "tconv_out_len",
]
