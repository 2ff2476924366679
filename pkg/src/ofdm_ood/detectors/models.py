"""The four detector architectures.

Every model takes ``[batch, 960, 2]`` IQ examples. Each class carries a
plain-dict ``config`` that is enough to rebuild it from a checkpoint.
"""

from __future__ import annotations

import math

import torch
from torch import nn
from torch.nn import functional as F

from ..nn import Layer, LayerSpec
from ..signal import OfdmConfig
from .backbone import ResidualBackbone, spectral_front_end

N_CLASSES = 4


def _merged(defaults: dict, config: dict, kind: str) -> dict:
    unknown = sorted(set(config) - set(defaults))
    if unknown:
        raise ValueError(f"unknown {kind} model settings: {', '.join(unknown)}")
    return {**defaults, **config}


def _generator(seed: int) -> torch.Generator:
    g = torch.Generator()
    g.manual_seed(int(seed))
    return g


class MspModel(nn.Module):
    kind = "msp"
    defaults = dict(channels=32, kernel=3, dilations=(1, 1, 1), dropout=0.1,
                    stem_kernel=4, stem_stride=4, derotate=True,
                    n_classes=N_CLASSES, init_seed=0)

    def __init__(self, **config):
        super().__init__()
        cfg = _merged(self.defaults, config, self.kind)
        cfg["dilations"] = list(cfg["dilations"])
        self.config = cfg
        g = _generator(cfg["init_seed"])
        self.backbone = ResidualBackbone(2, cfg["channels"], cfg["kernel"], cfg["dilations"],
                                         cfg["dropout"], causal=False, generator=g,
                                         stem_kernel=cfg["stem_kernel"],
                                         stem_stride=cfg["stem_stride"])
        self.pool = Layer(LayerSpec("global_avg_pool"))
        self.head = Layer(LayerSpec("linear", cfg["channels"], cfg["n_classes"]), g)

    def features(self, x: torch.Tensor) -> torch.Tensor:
        return self.pool(self.backbone(spectral_front_end(x, derotate=self.config["derotate"])))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """Class logits ``[batch, n_classes]``."""
        return self.head(self.features(x))


class DmlModel(MspModel):
    kind = "dml"
    defaults = dict(MspModel.defaults, embedding_dim=64, alpha=32.0, delta=0.1)

    def __init__(self, **config):
        super().__init__(**config)
        cfg = self.config
        g = _generator(cfg["init_seed"] + 1)
        self.head = Layer(LayerSpec("linear", cfg["channels"], cfg["embedding_dim"]), g)
        proxies = torch.randn(cfg["n_classes"], cfg["embedding_dim"], generator=g)
        self.proxies = nn.Parameter(proxies)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """Embeddings ``[batch, embedding_dim]`` (not normalized)."""
        return self.head(self.features(x))


class VaeModel(nn.Module):
    """Conv encoder over one 64-bin sub-packet spectrum, transposed-conv decoder
    ending in a channel-wise max that emits the 64-bin magnitude spectrum."""

    kind = "vae"
    defaults = dict(latent_dim=16, enc_channels=(64, 128), dec_channels=(128, 64, 16),
                    n_bins=64, init_seed=0)

    def __init__(self, **config):
        super().__init__()
        cfg = _merged(self.defaults, config, self.kind)
        cfg["enc_channels"] = list(cfg["enc_channels"])
        cfg["dec_channels"] = list(cfg["dec_channels"])
        self.config = cfg
        g = _generator(cfg["init_seed"])
        c1, c2 = cfg["enc_channels"]
        d0, d1, d2 = cfg["dec_channels"]
        n = cfg["n_bins"]
        if n % 4:
            raise ValueError("n_bins must be divisible by 4 (two stride-2 stages)")
        down = n // 4
        self.encoder = nn.Sequential(
            Layer(LayerSpec("conv1d", 2, c1, kernel_size=4, stride=2, padding=1), g),
            Layer(LayerSpec("batchnorm1d", features=c1)),
            Layer(LayerSpec("relu")),
            Layer(LayerSpec("conv1d", c1, c2, kernel_size=4, stride=2, padding=1), g),
            Layer(LayerSpec("batchnorm1d", features=c2)),
            Layer(LayerSpec("relu")),
            Layer(LayerSpec("flatten")),
        )
        flat = c2 * down
        self.mu = Layer(LayerSpec("linear", flat, cfg["latent_dim"]), g)
        self.logvar = Layer(LayerSpec("linear", flat, cfg["latent_dim"]), g)
        self.decoder = nn.Sequential(
            Layer(LayerSpec("linear", cfg["latent_dim"], d0 * down), g),
            Layer(LayerSpec("reshape", shape=(d0, down))),
            Layer(LayerSpec("batchnorm1d", features=d0)),
            Layer(LayerSpec("relu")),
            Layer(LayerSpec("transposed_conv1d", d0, d1, kernel_size=4, stride=2, padding=1), g),
            Layer(LayerSpec("batchnorm1d", features=d1)),
            Layer(LayerSpec("relu")),
            Layer(LayerSpec("transposed_conv1d", d1, d2, kernel_size=4, stride=2, padding=1), g),
            Layer(LayerSpec("batchnorm1d", features=d2)),
            Layer(LayerSpec("relu")),
            Layer(LayerSpec("channel_max")),
        )

    def encode(self, rows: torch.Tensor):
        """``[n, 2, 64]`` spectra -> (mu, logvar), each ``[n, latent_dim]``."""
        h = self.encoder(rows)
        return self.mu(h), self.logvar(h)

    def decode(self, z: torch.Tensor) -> torch.Tensor:
        return self.decoder(z)

    def forward(self, rows: torch.Tensor, eps: torch.Tensor | None = None):
        """Returns (reconstruction, mu, logvar); ``eps=None`` decodes the mean."""
        mu, logvar = self.encode(rows)
        z = mu if eps is None else mu + eps * torch.exp(0.5 * logvar)
        return self.decode(z), mu, logvar


def fold_subpackets(spectral: torch.Tensor) -> torch.Tensor:
    """``[B, 12, 64, 2]`` -> ``[B*12, 2, 64]``: sub-packets join the batch axis."""
    b, s, n, c = spectral.shape
    return spectral.reshape(b * s, n, c).transpose(1, 2)


def magnitude_spectrum(rows: torch.Tensor) -> torch.Tensor:
    """``[n, 2, 64]`` -> ``[n, 64]`` of (I^2 + Q^2)^(1/2)."""
    return torch.sqrt(rows[:, 0] ** 2 + rows[:, 1] ** 2)


def symbol_phase_channels(length: int, period: int, harmonics: int,
                          dtype=torch.float32) -> torch.Tensor:
    """``[2*harmonics, length]`` sin/cos of the position within each ``period``."""
    t = torch.arange(length, dtype=torch.float64)
    rows = []
    for h in range(1, harmonics + 1):
        w = 2 * math.pi * h * t / period
        rows += [torch.sin(w), torch.cos(w)]
    return torch.stack(rows).to(dtype)


class ArModel(nn.Module):
    """Causal dilated TCN emitting a diagonal Gaussian over each next 2-channel step.

    The sequence is the example's per-symbol spectrum read bin by bin (see
    ``ar_sequence``). The input is shifted right by one step behind a zero
    start token, so the parameters at position t see only steps before t.
    The subcarrier index enters as sin/cos channels of the position within
    each 64-bin symbol.
    """

    kind = "ar"
    defaults = dict(channels=32, kernel=3, dilations=(1, 2, 4, 8, 16, 32), dropout=0.1,
                    phase_harmonics=4, period=OfdmConfig().n_subcarriers,
                    logvar_min=-10.0, logvar_max=4.0, init_seed=0)

    def __init__(self, **config):
        super().__init__()
        cfg = _merged(self.defaults, config, self.kind)
        cfg["dilations"] = list(cfg["dilations"])
        self.config = cfg
        g = _generator(cfg["init_seed"])
        in_ch = 2 + 2 * cfg["phase_harmonics"]
        self.backbone = ResidualBackbone(in_ch, cfg["channels"], cfg["kernel"], cfg["dilations"],
                                         cfg["dropout"], causal=True, generator=g)
        self.head = Layer(LayerSpec("conv1d", cfg["channels"], 4, kernel_size=1,
                                    causal=True), g)

    @property
    def receptive_field(self) -> int:
        return ResidualBackbone.receptive_field(self.config["kernel"], self.config["dilations"])

    def signature(self) -> dict:
        return {k: v for k, v in self.config.items() if k != "init_seed"}

    def forward(self, x: torch.Tensor):
        """``[B, T, 2]`` -> (mean, logvar), each ``[B, T, 2]``."""
        if x.dim() != 3 or x.shape[-1] != 2:
            raise ValueError(f"expected [batch, length, 2], got {list(x.shape)}")
        b, t, _ = x.shape
        seq = x.transpose(1, 2)
        shifted = F.pad(seq, (1, 0))[..., :t]
        cfg = self.config
        if cfg["phase_harmonics"]:
            pos = symbol_phase_channels(t, cfg["period"], cfg["phase_harmonics"], x.dtype)
            shifted = torch.cat([shifted, pos.unsqueeze(0).expand(b, -1, -1)], dim=1)
        out = self.head(self.backbone(shifted))
        mean = out[:, :2]
        lo, hi = cfg["logvar_min"], cfg["logvar_max"]
        mid, half = (hi + lo) / 2, (hi - lo) / 2
        logvar = mid + half * torch.tanh((out[:, 2:] - mid) / half)
        return mean.transpose(1, 2), logvar.transpose(1, 2)


MODEL_CLASSES = {cls.kind: cls for cls in (MspModel, DmlModel, VaeModel, ArModel)}


def build_model(kind: str, **config) -> nn.Module:
    try:
        cls = MODEL_CLASSES[kind]
    except KeyError:
        raise ValueError(f"unknown model kind {kind!r}; expected one of {sorted(MODEL_CLASSES)}")
    return cls(**config)


def parameter_count(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters())
