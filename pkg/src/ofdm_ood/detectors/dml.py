"""Proxy-anchor metric learning detector."""

from __future__ import annotations

import math

import numpy as np
import torch
from torch.nn import functional as F

from .models import DmlModel
from .training import BatchSampler, OeConfig, TrainConfig, TrainResult, as_tensor, run_training


def cosine_similarity(embeddings: torch.Tensor, proxies: torch.Tensor) -> torch.Tensor:
    """``[n, E] x [P, E] -> [n, P]``."""
    return F.normalize(embeddings, dim=1) @ F.normalize(proxies, dim=1).T


def _log1p_sum_exp(exponents: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    """Per column: log(1 + sum over masked rows of exp(exponent))."""
    masked = exponents.masked_fill(~mask, float("-inf"))
    zeros = torch.zeros(1, exponents.shape[1], dtype=exponents.dtype)
    return torch.logsumexp(torch.cat([zeros, masked]), dim=0)


def proxy_anchor_loss(embeddings, labels, proxies, alpha: float = 32.0, delta: float = 0.1,
                      oe_embeddings=None, oe_weight: float = 0.0) -> torch.Tensor:
    """Proxy-anchor objective.

    Positive term averaged over proxies that have a positive in the batch
    (zero when none do); negative term averaged over all proxies. Outlier
    embeddings, when given with a positive weight, count as negatives of every
    proxy with their exponentials scaled by ``oe_weight``.
    """
    sim = cosine_similarity(embeddings, proxies)
    n_proxies = proxies.shape[0]
    pos_mask = F.one_hot(labels, n_proxies).bool()
    pos = _log1p_sum_exp(-alpha * (sim - delta), pos_mask)
    has_pos = pos_mask.any(dim=0)
    pos_term = pos[has_pos].sum() / has_pos.sum() if has_pos.any() else sim.sum() * 0.0

    neg_exp = alpha * (sim + delta)
    neg_mask = ~pos_mask
    if oe_embeddings is not None and oe_weight > 0:
        oe_sim = cosine_similarity(oe_embeddings, proxies)
        neg_exp = torch.cat([neg_exp, alpha * (oe_sim + delta) + math.log(oe_weight)])
        neg_mask = torch.cat([neg_mask, torch.ones_like(oe_sim, dtype=torch.bool)])
    neg_term = _log1p_sum_exp(neg_exp, neg_mask).sum() / n_proxies
    return pos_term + neg_term


def score_from_embeddings(embeddings: torch.Tensor, proxies: torch.Tensor) -> torch.Tensor:
    """1 - max cosine similarity to any proxy; in [0, 2]."""
    return 1.0 - cosine_similarity(embeddings, proxies).amax(dim=1)


@torch.no_grad()
def dml_score(model: DmlModel, x) -> torch.Tensor:
    model.eval()
    return score_from_embeddings(model(as_tensor(x)), model.proxies)


def dml_train(model: DmlModel, din_iq, din_labels, oe: OeConfig, cfg: TrainConfig,
              oe_iq=None, optimizer=None, start_step: int = 0) -> TrainResult:
    x = as_tensor(din_iq)
    y = as_tensor(np.asarray(din_labels, dtype=np.int64))
    alpha, delta = model.config["alpha"], model.config["delta"]
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
            loss = proxy_anchor_loss(model(xb), yb, model.proxies, alpha, delta)
            return loss, {"proxy_anchor": float(loss.detach())}
        emb = model(torch.cat([xb, xo[oe_sampler.next()]]))
        loss = proxy_anchor_loss(emb[: len(idx)], yb, model.proxies, alpha, delta,
                                 emb[len(idx):], oe.lam)
        return loss, {"proxy_anchor": float(loss.detach())}

    return run_training(model, step, cfg, optimizer, start_step)
