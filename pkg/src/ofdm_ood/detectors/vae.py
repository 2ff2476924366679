"""Variational autoencoder over sub-packet spectra, scored by reconstruction error."""

from __future__ import annotations

import math

import numpy as np
import torch

from ..dataset import preprocess
from .models import VaeModel, fold_subpackets, magnitude_spectrum
from .training import BatchSampler, OeConfig, TrainConfig, TrainResult, as_tensor, run_training


def kl_to_standard_normal(mu: torch.Tensor, logvar: torch.Tensor) -> torch.Tensor:
    """Per-row KL(N(mu, diag(exp(logvar))) || N(0, I)), summed over latent dims."""
    return -0.5 * (1 + logvar - mu ** 2 - torch.exp(logvar)).sum(dim=-1)


def kl_monte_carlo(mu: torch.Tensor, logvar: torch.Tensor, n_samples: int,
                   generator: torch.Generator | None = None) -> tuple[float, float]:
    """Sampled estimate of the same KL for one latent posterior: (mean, std error)."""
    mu = mu.reshape(-1).double()
    logvar = logvar.reshape(-1).double()
    std = torch.exp(0.5 * logvar)
    eps = torch.randn(n_samples, mu.numel(), generator=generator, dtype=torch.float64)
    z = mu + eps * std
    log_q = (-0.5 * (eps ** 2 + logvar + math.log(2 * math.pi))).sum(dim=1)
    log_p = (-0.5 * (z ** 2 + math.log(2 * math.pi))).sum(dim=1)
    d = log_q - log_p
    return float(d.mean()), float(d.std() / math.sqrt(n_samples))


def vae_loss(model, rows: torch.Tensor, beta: float = 0.5, n_samples: int = 1,
             generator: torch.Generator | None = None):
    """beta * KL + MSE(p, p') on folded ``[n, 2, 64]`` sub-packet spectra.

    The reconstruction term is averaged over ``n_samples`` reparametrized
    latent draws. Returns (loss, parts) with parts carrying the unweighted KL
    and the MSE.
    """
    mu, logvar = model.encode(rows)
    target = magnitude_spectrum(rows)
    std = torch.exp(0.5 * logvar)
    mse = 0.0
    for _ in range(n_samples):
        eps = torch.randn(mu.shape, generator=generator, dtype=mu.dtype)
        mse = mse + ((model.decode(mu + eps * std) - target) ** 2).mean()
    mse = mse / n_samples
    kl = kl_to_standard_normal(mu, logvar).mean()
    loss = beta * kl + mse if beta else mse
    return loss, {"kl": float(kl.detach()), "mse": float(mse.detach())}


def canonical_phase(iq) -> np.ndarray:
    """Rotate each example so its sample sum lies on the positive real axis.

    A global phase rotation of the input then cancels, which makes the
    reconstruction score blind to the carrier phase.
    """
    iq = np.asarray(iq, dtype=np.float32)
    z = iq[..., 0].astype(np.float64) + 1j * iq[..., 1]
    ref = z.sum(axis=-1, keepdims=True)
    z = z * np.exp(-1j * np.angle(ref))
    return np.stack([z.real, z.imag], axis=-1).astype(np.float32)


def spectral_rows(iq) -> torch.Tensor:
    """IQ examples ``[B, 960, 2]`` -> folded spectra ``[B*12, 2, 64]``."""
    return fold_subpackets(as_tensor(preprocess(canonical_phase(iq))))


@torch.no_grad()
def reconstruction_error(model: VaeModel, iq) -> torch.Tensor:
    """Mean squared spectral error per example, decoding the latent mean."""
    model.eval()
    rows = spectral_rows(iq)
    recon, _, _ = model(rows)
    err = ((recon - magnitude_spectrum(rows)) ** 2).mean(dim=1)
    return err.reshape(-1, 12).mean(dim=1)


def vae_score(model: VaeModel, x) -> torch.Tensor:
    return reconstruction_error(model, x)


def vae_train(model: VaeModel, din_iq, oe: OeConfig, cfg: TrainConfig, beta: float = 0.5,
              n_samples: int = 1, oe_iq=None, margin_scale: float = 2.0, optimizer=None,
              start_step: int = 0) -> TrainResult:
    """Sub-packets fold into the batch, so each step sees 12x``cfg.batch_size`` rows.

    With OE, outlier rows pay ``lam * relu(m - mse)`` where ``m`` is
    ``margin_scale`` times a running mean of the in-distribution MSE.
    """
    x = np.asarray(din_iq)
    sampler = BatchSampler(len(x), cfg.batch_size, cfg.seed)
    gen = torch.Generator()
    gen.manual_seed(cfg.seed + 7)
    if oe.active:
        if oe_iq is None or len(oe_iq) == 0:
            raise ValueError("outlier exposure enabled but no outlier data given")
        xo = np.asarray(oe_iq)
        n_oe = max(1, int(math.ceil(cfg.batch_size * oe.batch_fraction)))
        oe_sampler = BatchSampler(len(xo), n_oe, cfg.seed + 1)
    running = {"mse": None}

    def step(_):
        rows = spectral_rows(x[sampler.next()])
        if not oe.active:
            return vae_loss(model, rows, beta, n_samples, gen)
        oe_rows = spectral_rows(xo[oe_sampler.next()])
        both = torch.cat([rows, oe_rows])
        mu, logvar = model.encode(both)
        eps = torch.randn(mu.shape, generator=gen, dtype=mu.dtype)
        recon = model.decode(mu + eps * torch.exp(0.5 * logvar))
        err = ((recon - magnitude_spectrum(both)) ** 2).mean(dim=1)
        n = rows.shape[0]
        mse = err[:n].mean()
        kl = kl_to_standard_normal(mu[:n], logvar[:n]).mean()
        m_now = float(mse.detach())
        running["mse"] = m_now if running["mse"] is None else 0.9 * running["mse"] + 0.1 * m_now
        margin = margin_scale * running["mse"]
        hinge = torch.relu(margin - err[n:]).mean()
        loss = beta * kl + mse + oe.lam * hinge
        return loss, {"kl": float(kl.detach()), "mse": m_now, "oe": float(hinge.detach())}

    return run_training(model, step, cfg, optimizer, start_step)
