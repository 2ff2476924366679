"""Maximum-softmax-probability detector."""

from __future__ import annotations

import math

import numpy as np
import torch
from torch.nn import functional as F

from .models import MspModel
from .training import BatchSampler, OeConfig, TrainConfig, TrainResult, as_tensor, run_training


def uniform_cross_entropy(logits: torch.Tensor) -> torch.Tensor:
    """Mean cross-entropy from softmax(logits) to the uniform distribution.

    Equals ln(C) when the logits are all equal, and is never smaller.
    """
    return (torch.logsumexp(logits, dim=1) - logits.mean(dim=1)).mean()


def msp_loss(logits, labels, oe_logits=None, lam: float = 0.0):
    ce = F.cross_entropy(logits, labels)
    if oe_logits is None or lam == 0:
        return ce, {"ce": float(ce.detach()), "oe": 0.0}
    oe = uniform_cross_entropy(oe_logits)
    return ce + lam * oe, {"ce": float(ce.detach()), "oe": float(oe.detach())}


def score_from_logits(logits: torch.Tensor) -> torch.Tensor:
    """1 - max softmax probability; in [0, 1 - 1/C]."""
    return 1.0 - F.softmax(logits, dim=1).amax(dim=1)


@torch.no_grad()
def msp_score(model: MspModel, x) -> torch.Tensor:
    model.eval()
    return score_from_logits(model(as_tensor(x)))


@torch.no_grad()
def accuracy(model: MspModel, x, labels, batch: int = 512) -> float:
    model.eval()
    x = as_tensor(x)
    labels = as_tensor(labels)
    hits = 0
    for i in range(0, x.shape[0], batch):
        hits += int((model(x[i:i + batch]).argmax(dim=1) == labels[i:i + batch]).sum())
    return hits / x.shape[0]


def msp_train(model: MspModel, din_iq, din_labels, oe: OeConfig, cfg: TrainConfig,
              oe_iq=None, optimizer=None, start_step: int = 0) -> TrainResult:
    x = as_tensor(din_iq)
    y = as_tensor(np.asarray(din_labels, dtype=np.int64))
    sampler = BatchSampler(x.shape[0], cfg.batch_size, cfg.seed)
    if oe.active:
        if oe_iq is None or len(oe_iq) == 0:
            raise ValueError("outlier exposure enabled but no outlier data given")
        xo = as_tensor(oe_iq)
        n_oe = max(1, int(math.ceil(cfg.batch_size * oe.batch_fraction)))
        oe_sampler = BatchSampler(xo.shape[0], n_oe, cfg.seed + 1)

    def step(_):
        idx = sampler.next()
        xb, yb = x[idx], y[idx]
        if not oe.active:
            return msp_loss(model(xb), yb)
        xob = xo[oe_sampler.next()]
        logits = model(torch.cat([xb, xob]))
        return msp_loss(logits[: len(idx)], yb, logits[len(idx):], oe.lam)

    return run_training(model, step, cfg, optimizer, start_step)
