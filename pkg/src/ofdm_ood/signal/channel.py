"""Tapped-delay-line multipath surrogate for the indoor WLAN channel."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class ChannelModel:
    kind: str = "tapped_delay_line"
    delays: np.ndarray = field(default_factory=lambda: np.arange(5))
    power_db: np.ndarray = field(default_factory=lambda: np.array([0.0, -3.0, -6.0, -9.0, -12.0]))

    def __post_init__(self):
        if self.kind not in ("none", "tapped_delay_line"):
            raise ValueError(f"unknown channel kind {self.kind!r}")
        self.delays = np.asarray(self.delays, dtype=np.int64)
        self.power_db = np.asarray(self.power_db, dtype=float)
        if self.delays.shape != self.power_db.shape or self.delays.ndim != 1:
            raise ValueError("delays and power_db must be 1-D with equal length")
        if np.any(self.delays < 0):
            raise ValueError("tap delays must be non-negative")

    @classmethod
    def none(cls) -> "ChannelModel":
        return cls(kind="none", delays=np.zeros(1, dtype=np.int64), power_db=np.zeros(1))

    @property
    def tap_powers(self) -> np.ndarray:
        p = 10.0 ** (self.power_db / 10.0)
        return p / p.sum()

    def draw_taps(self, rng: np.random.Generator) -> np.ndarray:
        """Complex taps on the delay grid: CN(0, p_i) at each delay."""
        n = self.tap_powers.size
        g = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)
        taps = np.zeros(int(self.delays.max()) + 1, dtype=complex)
        np.add.at(taps, self.delays, g * np.sqrt(self.tap_powers))
        return taps


def convolve_taps(x: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Linear convolution truncated to the input length."""
    return np.convolve(np.asarray(x, dtype=complex), taps)[: len(x)]


def apply_channel(x: np.ndarray, ch: ChannelModel, rng: np.random.Generator) -> np.ndarray:
    if ch.kind == "none":
        return np.array(x, dtype=complex, copy=True)
    return convolve_taps(x, ch.draw_taps(rng))
