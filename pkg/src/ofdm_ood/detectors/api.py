"""Kind-agnostic entry points: build, train, score, save and restore detectors."""

from __future__ import annotations

from dataclasses import asdict, replace

import numpy as np
import torch

from ..nn import (
    Checkpoint,
    CheckpointError,
    Optimizer,
    OptimizerConfig,
    load_module_tensors,
    module_tensors,
    named_layers,
)
from .ar import ArDetector, ar_llr_score, ar_sequence, ar_train
from .dml import dml_score, dml_train
from .models import MODEL_CLASSES, build_model
from .msp import msp_score, msp_train
from .training import OeConfig, TrainConfig, TrainingError, as_tensor
from .vae import vae_score, vae_train

KINDS = ("msp", "dml", "vae", "ar")

# Desk-scale presets: the model config and optimizer settings used by the CLI
# and the acceptance suite unless overridden.
DESK_PRESETS = {
    "msp": dict(model=dict(channels=64, dilations=(1, 2, 4)), steps=1000, lr=3e-3),
    "dml": dict(model=dict(channels=64, dilations=(1, 2, 4)), steps=1600, lr=3e-3),
    "vae": dict(model=dict(), steps=1000, lr=1e-3),
    "ar": dict(model=dict(), steps=600, lr=3e-3),
}


def build_detector(kind: str, oe: OeConfig | None = None, **config) -> torch.nn.Module:
    """A fresh detector. AR with active OE gets a background twin of the same shape."""
    if kind not in KINDS:
        raise ValueError(f"unknown model kind {kind!r}; expected one of {list(KINDS)}")
    if kind == "ar":
        background = None
        if oe is not None and oe.active:
            background = {**config, "init_seed": config.get("init_seed", 0) + 1}
        return ArDetector(config, background)
    return build_model(kind, **config)


def _submodels(model) -> dict[str, torch.nn.Module]:
    if isinstance(model, ArDetector):
        subs = {"semantic": model.semantic}
        if model.background is not None:
            subs["background"] = model.background
        return subs
    return {"model": model}


def train_detector(model, din_iq, din_labels, oe: OeConfig, cfg: TrainConfig, oe_iq=None,
                   optimizers: dict | None = None, start_step: int = 0):
    """Train in place. Returns (per-submodel TrainResult dict, optimizer dict)."""
    if len(din_iq) == 0:
        raise TrainingError("cannot train on an empty dataset")
    if oe.active and (oe_iq is None or len(oe_iq) == 0):
        raise TrainingError("outlier exposure enabled but the outlier set is empty")
    optimizers = optimizers or {}
    kind = model.kind
    results = {}
    if kind == "ar":
        results["semantic"] = ar_train(model.semantic, din_iq, replace(cfg, log_tag="semantic"),
                                       optimizer=optimizers.get("semantic"), start_step=start_step)
        if model.background is not None:
            if not oe.active:
                raise TrainingError("AR background twin present but outlier exposure is off")
            results["background"] = ar_train(model.background, oe_iq,
                                             replace(cfg, log_tag="background"),
                                             optimizer=optimizers.get("background"),
                                             start_step=start_step)
    elif kind == "vae":
        results["model"] = vae_train(model, din_iq, oe, cfg, oe_iq=oe_iq,
                                     optimizer=optimizers.get("model"), start_step=start_step)
    else:
        fn = msp_train if kind == "msp" else dml_train
        results["model"] = fn(model, din_iq, din_labels, oe, cfg, oe_iq=oe_iq,
                              optimizer=optimizers.get("model"), start_step=start_step)
    return results, {k: r.optimizer for k, r in results.items()}


def _score_chunk(model, x: torch.Tensor) -> torch.Tensor:
    kind = model.kind
    if kind == "msp":
        return msp_score(model, x)
    if kind == "dml":
        return dml_score(model, x)
    if kind == "vae":
        return vae_score(model, x)
    return ar_llr_score(model.semantic, model.background, ar_sequence(x))


def score_examples(model, iq, batch: int = 256) -> np.ndarray:
    """One float64 score per example of ``[n, 960, 2]``; higher = more anomalous."""
    iq = np.asarray(iq, dtype=np.float32)
    if iq.ndim != 3 or iq.shape[-1] != 2:
        raise ValueError(f"expected [n, block, 2] IQ, got shape {list(iq.shape)}")
    out = np.empty(len(iq), dtype=np.float64)
    with torch.no_grad():
        for i in range(0, len(iq), batch):
            out[i:i + batch] = _score_chunk(model, as_tensor(iq[i:i + batch])).double().numpy()
    return out


def to_checkpoint(model, train_config: dict | None = None,
                  optimizers: dict | None = None) -> Checkpoint:
    """Weights, buffers and (optionally) optimizer moments in one container."""
    tensors = {}
    layers = []
    for prefix, sub in _submodels(model).items():
        tensors.update({f"{prefix}.{k}": v for k, v in module_tensors(sub).items()})
        layers += [(f"{prefix}.{n}", s) for n, s in named_layers(sub)]
    for prefix, opt in (optimizers or {}).items():
        for k, v in opt.state_tensors().items():
            tensors[f"optim.{prefix}.{k}"] = v.detach().to(torch.float32).numpy().copy()
    return Checkpoint(model.kind, _jsonable(model.config), layers, tensors,
                      _jsonable(train_config or {}))


def from_checkpoint(ckpt: Checkpoint):
    """Rebuild (model, optimizer dict). Optimizers are None-free only when the
    checkpoint carries moments for them."""
    kind = ckpt.kind
    if kind not in KINDS:
        raise CheckpointError(f"checkpoint holds unknown model kind {kind!r}")
    cfg = ckpt.model_config
    if kind == "ar":
        model = ArDetector(cfg["semantic"], cfg["background"])
    else:
        model = MODEL_CLASSES[kind](**cfg)
    optimizers = {}
    for prefix, sub in _submodels(model).items():
        head = f"{prefix}."
        load_module_tensors(sub, {k[len(head):]: v for k, v in ckpt.tensors.items()
                                  if k.startswith(head)})
        ohead = f"optim.{prefix}."
        state = {k[len(ohead):]: torch.from_numpy(v) for k, v in ckpt.tensors.items()
                 if k.startswith(ohead)}
        if state:
            opt_cfg = OptimizerConfig(**ckpt.train_config.get("optimizer", {}))
            opt = Optimizer(sub.parameters(), opt_cfg)
            opt.load_state_tensors(state)
            optimizers[prefix] = opt
    model.eval()
    return model, optimizers


def train_echo(kind: str, cfg: TrainConfig, oe: OeConfig, step: int, **extra) -> dict:
    """The training-config record stored in a checkpoint header."""
    return {"kind": kind, "seed": cfg.seed, "step": step, "oe": asdict(oe),
            "batch_size": cfg.batch_size, "optimizer": asdict(cfg.optimizer), **extra}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj
