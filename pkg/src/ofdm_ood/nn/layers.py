"""Layer vocabulary shared by every detector.

Layers are described by a :class:`LayerSpec` and realized as small torch
modules that keep their spec, so a model can always list its layers (for the
checkpoint header) and predict its own output shapes.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import torch
from torch import nn
from torch.nn import functional as F

KINDS = (
    "conv1d",
    "transposed_conv1d",
    "linear",
    "batchnorm1d",
    "relu",
    "dropout",
    "flatten",
    "reshape",
    "channel_max",
    "global_avg_pool",
)


class ShapeError(ValueError):
    pass


@dataclass(frozen=True)
class LayerSpec:
    kind: str
    in_channels: int = 0
    out_channels: int = 0
    kernel_size: int = 1
    stride: int = 1
    dilation: int = 1
    padding: int | str = 0
    output_padding: int = 0
    causal: bool = False
    rate: float = 0.0
    features: int = 0
    shape: tuple = field(default=())
    bias: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown layer kind {self.kind!r}")
        if self.kernel_size < 1 or self.stride < 1 or self.dilation < 1:
            raise ValueError("kernel_size, stride and dilation must be >= 1")
        if not 0.0 <= self.rate < 1.0:
            raise ValueError(f"dropout rate must lie in [0, 1), got {self.rate}")
        if self.causal and self.kind != "conv1d":
            raise ValueError("the causal flag only applies to conv1d")
        if self.causal and self.padding not in (0, "causal"):
            raise ValueError("causal conv1d computes its own padding")
        if self.kind in ("conv1d", "transposed_conv1d", "linear"):
            if self.in_channels < 1 or self.out_channels < 1:
                raise ValueError(f"{self.kind} needs positive in/out channels")
        if self.kind == "batchnorm1d" and self.features < 1:
            raise ValueError("batchnorm1d needs a positive feature count")
        if isinstance(self.padding, str) and self.padding not in ("same", "causal"):
            raise ValueError(f"padding must be an int, 'same' or 'causal', got {self.padding!r}")
        object.__setattr__(self, "shape", tuple(self.shape))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["shape"] = list(self.shape)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "LayerSpec":
        return cls(**d)


def conv_out_len(length: int, kernel: int, stride: int, pad_total: int, dilation: int) -> int:
    return (length + pad_total - dilation * (kernel - 1) - 1) // stride + 1


def tconv_out_len(length: int, kernel: int, stride: int, padding: int, dilation: int,
                  output_padding: int) -> int:
    return (length - 1) * stride - 2 * padding + dilation * (kernel - 1) + output_padding + 1


def _conv_padding(spec: LayerSpec) -> tuple[int, int]:
    """(left, right) zero padding for a conv1d spec."""
    reach = spec.dilation * (spec.kernel_size - 1)
    if spec.causal or spec.padding == "causal":
        return reach, 0
    if spec.padding == "same":
        if spec.stride != 1:
            raise ValueError("'same' padding requires stride 1")
        return reach // 2, reach - reach // 2
    return int(spec.padding), int(spec.padding)


def output_shape(spec: LayerSpec, in_shape: tuple) -> tuple:
    """Closed-form output shape, raising :class:`ShapeError` on mismatch."""
    s = tuple(in_shape)
    k = spec.kind
    if k == "conv1d" or k == "transposed_conv1d":
        if len(s) != 3 or s[1] != spec.in_channels:
            raise ShapeError(f"{k} expects [batch, {spec.in_channels}, length], got {list(s)}")
        if k == "conv1d":
            left, right = _conv_padding(spec)
            n = conv_out_len(s[2], spec.kernel_size, spec.stride, left + right, spec.dilation)
        else:
            n = tconv_out_len(s[2], spec.kernel_size, spec.stride, int(spec.padding),
                              spec.dilation, spec.output_padding)
        if n < 1:
            raise ShapeError(f"{k} input length {s[2]} too short for kernel {spec.kernel_size} "
                             f"with dilation {spec.dilation}")
        return (s[0], spec.out_channels, n)
    if k == "linear":
        if len(s) < 2 or s[-1] != spec.in_channels:
            raise ShapeError(f"linear expects [..., {spec.in_channels}], got {list(s)}")
        return s[:-1] + (spec.out_channels,)
    if k == "batchnorm1d":
        if len(s) not in (2, 3) or s[1] != spec.features:
            raise ShapeError(f"batchnorm1d expects [batch, {spec.features}(, length)], got {list(s)}")
        return s
    if k in ("relu", "dropout"):
        return s
    if k == "flatten":
        if len(s) < 2:
            raise ShapeError(f"flatten expects at least 2 dims, got {list(s)}")
        return (s[0], math.prod(s[1:]))
    if k == "reshape":
        if math.prod(s[1:]) != math.prod(spec.shape):
            raise ShapeError(f"cannot reshape {list(s[1:])} to {list(spec.shape)}")
        return (s[0],) + spec.shape
    if k == "channel_max":
        if len(s) != 3:
            raise ShapeError(f"channel_max expects [batch, channels, length], got {list(s)}")
        return (s[0], s[2])
    if k == "global_avg_pool":
        if len(s) != 3:
            raise ShapeError(f"global_avg_pool expects [batch, channels, length], got {list(s)}")
        return (s[0], s[1])
    raise AssertionError(k)


def _uniform_(t: torch.Tensor, bound: float, generator: torch.Generator | None) -> None:
    with torch.no_grad():
        t.uniform_(-bound, bound, generator=generator)


class Layer(nn.Module):
    """A single spec-described layer."""

    def __init__(self, spec: LayerSpec, generator: torch.Generator | None = None):
        super().__init__()
        self.spec = spec
        k = spec.kind
        if k in ("conv1d", "transposed_conv1d"):
            if k == "conv1d":
                w = torch.empty(spec.out_channels, spec.in_channels, spec.kernel_size)
                fan_in = spec.in_channels * spec.kernel_size
            else:
                w = torch.empty(spec.in_channels, spec.out_channels, spec.kernel_size)
                fan_in = spec.out_channels * spec.kernel_size
            bound = 1.0 / math.sqrt(fan_in)
            _uniform_(w, bound, generator)
            self.weight = nn.Parameter(w)
            if spec.bias:
                b = torch.empty(spec.out_channels)
                _uniform_(b, bound, generator)
                self.bias = nn.Parameter(b)
            else:
                self.bias = None
        elif k == "linear":
            bound = 1.0 / math.sqrt(spec.in_channels)
            w = torch.empty(spec.out_channels, spec.in_channels)
            _uniform_(w, bound, generator)
            self.weight = nn.Parameter(w)
            if spec.bias:
                b = torch.empty(spec.out_channels)
                _uniform_(b, bound, generator)
                self.bias = nn.Parameter(b)
            else:
                self.bias = None
        elif k == "batchnorm1d":
            self.weight = nn.Parameter(torch.ones(spec.features))
            self.bias = nn.Parameter(torch.zeros(spec.features))
            self.register_buffer("running_mean", torch.zeros(spec.features))
            self.register_buffer("running_var", torch.ones(spec.features))

    def extra_repr(self) -> str:
        return self.spec.kind

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        spec = self.spec
        k = spec.kind
        if k == "conv1d":
            left, right = _conv_padding(spec)
            if left or right:
                x = F.pad(x, (left, right))
            return F.conv1d(x, self.weight, self.bias, stride=spec.stride, dilation=spec.dilation)
        if k == "transposed_conv1d":
            return F.conv_transpose1d(x, self.weight, self.bias, stride=spec.stride,
                                      padding=int(spec.padding),
                                      output_padding=spec.output_padding,
                                      dilation=spec.dilation)
        if k == "linear":
            return F.linear(x, self.weight, self.bias)
        if k == "batchnorm1d":
            return F.batch_norm(x, self.running_mean, self.running_var, self.weight, self.bias,
                                training=self.training, momentum=0.1, eps=1e-5)
        if k == "relu":
            return F.relu(x)
        if k == "dropout":
            return F.dropout(x, spec.rate, training=self.training)
        if k == "flatten":
            return x.reshape(x.shape[0], -1)
        if k == "reshape":
            return x.reshape((x.shape[0],) + spec.shape)
        if k == "channel_max":
            return x.amax(dim=1)
        if k == "global_avg_pool":
            return x.mean(dim=2)
        raise AssertionError(k)


def build_layer(spec: LayerSpec, generator: torch.Generator | None = None) -> Layer:
    return Layer(spec, generator)


def forward(layer: Layer, x: torch.Tensor, training: bool = False) -> torch.Tensor:
    """Shape-checked single-layer forward pass."""
    output_shape(layer.spec, tuple(x.shape))
    layer.train(training)
    return layer(x)


def named_layers(model: nn.Module) -> list[tuple[str, LayerSpec]]:
    return [(name, m.spec) for name, m in model.named_modules() if isinstance(m, Layer)]
