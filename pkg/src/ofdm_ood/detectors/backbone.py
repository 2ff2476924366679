"""Pre-activation residual conv stacks shared by the MSP, DML and AR models."""

from __future__ import annotations

import torch
from torch import nn

from ..nn import Layer, LayerSpec
from ..signal import OfdmConfig


class ResidualBlock(nn.Module):
    """BN -> ReLU -> conv -> BN -> ReLU -> dropout -> conv, plus identity skip."""

    def __init__(self, channels: int, kernel: int, dilation: int, dropout: float,
                 causal: bool, generator: torch.Generator | None = None):
        super().__init__()
        pad = "causal" if causal else "same"

        def conv():
            return Layer(LayerSpec("conv1d", channels, channels, kernel_size=kernel,
                                   dilation=dilation, padding=0 if causal else pad,
                                   causal=causal), generator)

        self.bn1 = Layer(LayerSpec("batchnorm1d", features=channels))
        self.act1 = Layer(LayerSpec("relu"))
        self.conv1 = conv()
        self.bn2 = Layer(LayerSpec("batchnorm1d", features=channels))
        self.act2 = Layer(LayerSpec("relu"))
        self.drop = Layer(LayerSpec("dropout", rate=dropout))
        self.conv2 = conv()

    def forward(self, x):
        h = self.conv1(self.act1(self.bn1(x)))
        h = self.conv2(self.drop(self.act2(self.bn2(h))))
        return x + h


class ResidualBackbone(nn.Module):
    def __init__(self, in_channels: int, channels: int, kernel: int, dilations,
                 dropout: float, causal: bool, generator: torch.Generator | None = None,
                 stem_kernel: int | None = None, stem_stride: int = 1):
        super().__init__()
        stem_kernel = stem_kernel or kernel
        if causal and stem_stride != 1:
            raise ValueError("a causal stack cannot downsample")
        if stem_stride == 1:
            pad = 0 if causal else "same"
        else:
            pad = 0
        self.stem = Layer(LayerSpec("conv1d", in_channels, channels, kernel_size=stem_kernel,
                                    stride=stem_stride, padding=pad, causal=causal), generator)
        self.blocks = nn.ModuleList(
            ResidualBlock(channels, kernel, d, dropout, causal, generator) for d in dilations
        )
        self.bn = Layer(LayerSpec("batchnorm1d", features=channels))
        self.act = Layer(LayerSpec("relu"))

    @staticmethod
    def receptive_field(kernel: int, dilations) -> int:
        return 1 + (kernel - 1) * (1 + 2 * sum(dilations))

    def forward(self, x):
        h = self.stem(x)
        for block in self.blocks:
            h = block(h)
        return self.act(self.bn(h))


def spectral_front_end(x: torch.Tensor, cfg: OfdmConfig = OfdmConfig(),
                       derotate: bool = True) -> torch.Tensor:
    """``[B, 960, 2]`` IQ -> ``[B, 2, 12*64]`` per-symbol DFT, cyclic prefix dropped.

    The orthonormal transform keeps unit-power packets at unit average bin
    energy. With ``derotate`` each symbol's common phase is removed with the
    blind fourth-power estimate arg(sum_k X_k^4)/4, leaving constellations in
    one of four quarter-turn poses.
    """
    if x.dim() != 3 or x.shape[1:] != (cfg.block_size, 2):
        raise ValueError(f"expected [batch, {cfg.block_size}, 2], got {list(x.shape)}")
    z = torch.complex(x[..., 0], x[..., 1])
    rows = z.reshape(x.shape[0], cfg.n_symbols, cfg.symbol_len)[..., cfg.cp_len:]
    spec = torch.fft.fft(rows, dim=-1, norm="ortho")
    if derotate:
        phase = torch.angle((spec ** 4).sum(dim=-1, keepdim=True)) / 4
        spec = spec * torch.exp(-1j * phase)
    spec = spec.reshape(x.shape[0], -1)
    return torch.stack([spec.real, spec.imag], dim=1)
