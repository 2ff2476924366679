"""Shared training harness: batching, outlier-exposure sampling, logging."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
import torch

from ..nn import Optimizer, OptimizerConfig, backward


class TrainingError(RuntimeError):
    pass


@dataclass
class OeConfig:
    """Outlier exposure: weight ``lam`` on the auxiliary term.

    A zero-weight term is skipped outright, so it cannot perturb batch-norm
    statistics or random draws: ``lam=0`` trains exactly like OE disabled.
    """

    enabled: bool = False
    lam: float = 0.5
    batch_fraction: float = 0.5

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("OE weight must be non-negative")
        if not 0 < self.batch_fraction <= 1:
            raise ValueError("OE batch fraction must lie in (0, 1]")

    @property
    def active(self) -> bool:
        return self.enabled and self.lam > 0


@dataclass
class TrainConfig:
    steps: int = 600
    batch_size: int = 64
    seed: int = 0
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    log_every: int = 50
    log_path: str | None = None
    log_tag: str | None = None  # names the submodel when several share one log

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TrainResult:
    history: list[dict]
    optimizer: Optimizer
    steps_done: int

    def curve(self, key: str = "loss") -> list[float]:
        return [h[key] for h in self.history]


def as_tensor(x) -> torch.Tensor:
    if isinstance(x, torch.Tensor):
        return x
    return torch.from_numpy(np.ascontiguousarray(x))


class BatchSampler:
    """Epoch-wise shuffled minibatches from a seeded numpy generator."""

    def __init__(self, n: int, batch_size: int, seed: int):
        if n == 0:
            raise TrainingError("cannot train on an empty dataset")
        self.n = n
        self.batch_size = min(batch_size, n)
        self.rng = np.random.default_rng(seed)
        self._order = np.empty(0, dtype=np.int64)
        self._pos = 0

    def next(self) -> np.ndarray:
        if self._pos + self.batch_size > self._order.size:
            self._order = self.rng.permutation(self.n)
            self._pos = 0
        idx = self._order[self._pos:self._pos + self.batch_size]
        self._pos += self.batch_size
        return np.sort(idx)


def run_training(
    model: torch.nn.Module,
    step_loss: Callable[[int], tuple[torch.Tensor, dict]],
    cfg: TrainConfig,
    optimizer: Optimizer | None = None,
    start_step: int = 0,
) -> TrainResult:
    """Generic loop: ``step_loss(step)`` returns (loss, scalar parts)."""
    torch.manual_seed(cfg.seed)
    opt = optimizer or Optimizer(model.parameters(), cfg.optimizer)
    history = []
    log = open(cfg.log_path, "a") if cfg.log_path else None
    t0 = time.perf_counter()
    try:
        model.train()
        for step in range(start_step, start_step + cfg.steps):
            opt.zero_grad()
            loss, parts = step_loss(step)
            if not torch.isfinite(loss):
                raise TrainingError(f"non-finite loss at step {step}: {parts}")
            backward(loss)
            opt.step()
            record = {"step": step + 1, "loss": float(loss.detach()), **parts}
            history.append(record)
            if log and ((step + 1) % cfg.log_every == 0 or step + 1 == start_step + cfg.steps):
                fields = " ".join(f"{k}={v:.6g}" for k, v in record.items() if k != "step")
                tag = f" model={cfg.log_tag}" if cfg.log_tag else ""
                log.write(f"step={step + 1}{tag} {fields} wall={time.perf_counter() - t0:.2f}\n")
                log.flush()
    finally:
        if log:
            log.close()
        model.eval()
    return TrainResult(history, opt, start_step + cfg.steps)
