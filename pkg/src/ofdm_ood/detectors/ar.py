"""Autoregressive Gaussian likelihood and semantic/background likelihood ratio."""

from __future__ import annotations

import math

import numpy as np
import torch
from torch import nn

from ..dataset import preprocess
from .models import ArModel
from .training import BatchSampler, TrainConfig, TrainingError, TrainResult, as_tensor, run_training

HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)


def ar_sequence(iq) -> torch.Tensor:
    """IQ examples ``[B, 960, 2]`` -> spectral sequences ``[B, 768, 2]``.

    The max-normalized sub-packet spectra are read symbol by symbol, bin by
    bin, so step ``64*s + k`` holds subcarrier k of symbol s.
    """
    spec = preprocess(np.asarray(iq, dtype=np.float32))
    return as_tensor(spec.reshape(spec.shape[0], -1, 2))


def gaussian_nll(x: torch.Tensor, mean: torch.Tensor, logvar: torch.Tensor) -> torch.Tensor:
    """Elementwise -log N(x; mean, exp(logvar))."""
    return HALF_LOG_2PI + 0.5 * logvar + 0.5 * (x - mean) ** 2 * torch.exp(-logvar)


def step_nll(model: ArModel, x: torch.Tensor) -> torch.Tensor:
    """Per-position NLL ``[B, T]`` summed over the two channels."""
    mean, logvar = model(x)
    return gaussian_nll(x, mean, logvar).sum(dim=-1)


def ar_nll(model: ArModel, x) -> torch.Tensor:
    """Sequence NLL per example, ``[B]``."""
    return step_nll(model, as_tensor(x)).sum(dim=1)


class ArDetector(nn.Module):
    """A semantic model and, with outlier exposure, a background twin."""

    kind = "ar"

    def __init__(self, semantic: dict | None = None, background: dict | None = None):
        super().__init__()
        self.semantic = ArModel(**(semantic or {}))
        self.background = ArModel(**background) if background is not None else None
        if self.background is not None:
            check_twins(self.semantic, self.background)
        self.config = {"semantic": self.semantic.config,
                       "background": None if self.background is None else self.background.config}


def check_twins(semantic: ArModel, background: ArModel) -> None:
    if semantic.signature() != background.signature():
        raise ValueError(
            f"background architecture {background.signature()} differs from "
            f"semantic {semantic.signature()}"
        )


@torch.no_grad()
def ar_llr_score(semantic: ArModel, background: ArModel | None, x) -> torch.Tensor:
    """NLL_semantic - NLL_background (higher = more anomalous); plain NLL when
    there is no background model."""
    semantic.eval()
    x = as_tensor(x)
    score = ar_nll(semantic, x).double()
    if background is None:
        return score
    check_twins(semantic, background)
    background.eval()
    return score - ar_nll(background, x).double()


@torch.no_grad()
def ar_sample(model: ArModel, n: int, length: int, generator: torch.Generator | None = None):
    """Ancestral samples ``[n, length, 2]`` (one forward pass per position)."""
    model.eval()
    x = torch.zeros(n, length, 2)
    for t in range(length):
        mean, logvar = model(x[:, : t + 1])
        noise = torch.randn(n, 2, generator=generator)
        x[:, t] = mean[:, t] + torch.exp(0.5 * logvar[:, t]) * noise
    return x


def ar_train(model: ArModel, iq, cfg: TrainConfig, crop_len: int | None = 256,
             optimizer=None, start_step: int = 0) -> TrainResult:
    """Minimize mean per-element NLL on symbol-aligned crops of the examples'
    spectral sequences. The default crop spans four symbols, which the default
    receptive field covers in full."""
    if len(iq) == 0:
        raise TrainingError("cannot train on an empty dataset")
    x = ar_sequence(iq)
    n, total, _ = x.shape
    period = model.config["period"]
    crop = total if crop_len is None else min(crop_len, total)
    n_starts = (total - crop) // period + 1
    sampler = BatchSampler(n, cfg.batch_size, cfg.seed)
    offsets = np.random.default_rng(cfg.seed + 3)

    def step(_):
        idx = sampler.next()
        starts = offsets.integers(0, n_starts, size=len(idx)) * period
        xb = torch.stack([x[i, s:s + crop] for i, s in zip(idx, starts)])
        nll = step_nll(model, xb).mean() / 2
        return nll, {"nll": float(nll.detach())}

    return run_training(model, step, cfg, optimizer, start_step)
