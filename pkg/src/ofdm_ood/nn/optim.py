"""Backward pass entry point and Adam/RAdam optimizers."""

from __future__ import annotations

from dataclasses import dataclass

import torch


def backward(loss: torch.Tensor) -> None:
    """Accumulate d(loss)/d(param) into every reachable parameter's ``.grad``."""
    if loss.numel() != 1 or loss.dim() > 1:
        raise ValueError(f"backward needs a scalar loss, got shape {list(loss.shape)}")
    if loss.grad_fn is None and not loss.requires_grad:
        raise ValueError("loss was not produced by a recorded computation")
    loss.reshape(()).backward()


@dataclass
class OptimizerConfig:
    kind: str = "radam"
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.kind not in ("adam", "radam"):
            raise ValueError(f"unknown optimizer {self.kind!r}")
        if not self.lr > 0:
            raise ValueError("learning rate must be positive")


class Optimizer:
    """Thin wrapper that refuses to step parameters without gradients.

    RAdam uses the un-rectified momentum update for the first few steps while
    the variance rectification term is undefined (handled inside torch).
    """

    def __init__(self, params, config: OptimizerConfig = OptimizerConfig()):
        self.params = [p for p in params if p.requires_grad]
        self.config = config
        cls = torch.optim.Adam if config.kind == "adam" else torch.optim.RAdam
        self._opt = cls(self.params, lr=config.lr, betas=(config.beta1, config.beta2),
                        eps=config.eps)

    @property
    def step_count(self) -> int:
        steps = [s["step"] for s in self._opt.state.values() if "step" in s]
        return int(max(steps)) if steps else 0

    def zero_grad(self) -> None:
        self._opt.zero_grad(set_to_none=True)

    def step(self) -> None:
        missing = [i for i, p in enumerate(self.params) if p.grad is None]
        if len(missing) == len(self.params):
            raise RuntimeError("optimizer step with no gradients populated; call backward first")
        self._opt.step()

    def state_tensors(self) -> dict[str, torch.Tensor]:
        """Moment buffers keyed by parameter position, for checkpointing."""
        out = {}
        for i, p in enumerate(self.params):
            st = self._opt.state.get(p, {})
            for key in ("exp_avg", "exp_avg_sq"):
                if key in st:
                    out[f"{i}.{key}"] = st[key]
            if "step" in st:
                out[f"{i}.step"] = torch.as_tensor(st["step"], dtype=torch.float32).reshape(1)
        return out

    def load_state_tensors(self, tensors: dict[str, torch.Tensor]) -> None:
        for i, p in enumerate(self.params):
            if f"{i}.exp_avg" not in tensors:
                continue
            self._opt.state[p] = {
                "step": torch.tensor(float(tensors[f"{i}.step"].item())),
                "exp_avg": tensors[f"{i}.exp_avg"].clone().to(p.dtype),
                "exp_avg_sq": tensors[f"{i}.exp_avg_sq"].clone().to(p.dtype),
            }


def optimizer_step(opt: Optimizer) -> None:
    opt.step()
