"""802.11-style OFDM victim packets at one sample per chip of the K-point grid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .modulation import ModScheme, random_symbols


@dataclass(frozen=True)
class OfdmConfig:
    n_subcarriers: int = 64
    cp_len: int = 16
    n_symbols: int = 12

    def __post_init__(self):
        if self.n_subcarriers < 1 or self.n_symbols < 1:
            raise ValueError("n_subcarriers and n_symbols must be positive")
        if not 0 <= self.cp_len <= self.n_subcarriers:
            raise ValueError("cp_len must lie in [0, n_subcarriers]")

    @property
    def symbol_len(self) -> int:
        return self.n_subcarriers + self.cp_len

    @property
    def block_size(self) -> int:
        return self.symbol_len * self.n_symbols


@dataclass(frozen=True)
class ImpairmentSpec:
    """Complex gain a*exp(j*theta)*exp(j*2*pi*cfo*t) plus a timing offset.

    ``cfo`` is in cycles/sample, ``timing_offset`` in OFDM symbols.
    """

    amplitude: float = 1.0
    phase: float = 0.0
    cfo: float = 0.0
    timing_offset: float = 0.0

    def __post_init__(self):
        if not self.amplitude > 0:
            raise ValueError(f"amplitude must be positive, got {self.amplitude}")
        if not 0.0 <= self.phase < 2 * np.pi:
            raise ValueError(f"phase must lie in [0, 2pi), got {self.phase}")

    @classmethod
    def draw(cls, rng: np.random.Generator, max_cfo: float = 1e-3) -> "ImpairmentSpec":
        phase = rng.uniform(0.0, 2 * np.pi)
        cfo = rng.uniform(-max_cfo, max_cfo) if max_cfo > 0 else 0.0
        return cls(amplitude=1.0, phase=float(phase), cfo=float(cfo))


def apply_impairments(x: np.ndarray, imp: ImpairmentSpec, symbol_len: int = 80) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    shift = int(round(imp.timing_offset * symbol_len))
    if shift:
        delayed = np.zeros_like(x)
        if shift > 0:
            delayed[shift:] = x[:-shift]
        else:
            delayed[:shift] = x[-shift:]
        x = delayed
    if imp.cfo == 0.0 and imp.phase == 0.0 and imp.amplitude == 1.0:
        return x.copy()
    t = np.arange(x.size)
    rot = imp.amplitude * np.exp(1j * (imp.phase + 2 * np.pi * imp.cfo * t))
    return x * rot


def ofdm_modulate(symbols: np.ndarray, cfg: OfdmConfig = OfdmConfig()) -> np.ndarray:
    """Inverse-transform each row of ``symbols`` and prepend its cyclic prefix.

    ``symbols`` has shape [n_symbols, n_subcarriers]; the orthonormal transform
    keeps unit-energy subcarrier symbols at unit time-domain power.
    """
    symbols = np.asarray(symbols, dtype=complex)
    if symbols.ndim != 2 or symbols.shape[1] != cfg.n_subcarriers:
        raise ValueError(
            f"expected symbols of shape [n, {cfg.n_subcarriers}], got {symbols.shape}"
        )
    body = np.fft.ifft(symbols, axis=1, norm="ortho")
    with_cp = np.concatenate([body[:, cfg.n_subcarriers - cfg.cp_len:], body], axis=1)
    return with_cp.reshape(-1)


def ofdm_demodulate(x: np.ndarray, cfg: OfdmConfig = OfdmConfig()) -> np.ndarray:
    """Strip cyclic prefixes and transform back to [n_symbols, n_subcarriers]."""
    x = np.asarray(x, dtype=complex)
    n_sym = x.size // cfg.symbol_len
    rows = x[: n_sym * cfg.symbol_len].reshape(n_sym, cfg.symbol_len)[:, cfg.cp_len:]
    return np.fft.fft(rows, axis=1, norm="ortho")


def normalize_power(x: np.ndarray, target: float = 1.0) -> np.ndarray:
    p = np.mean(np.abs(x) ** 2)
    if p == 0:
        return np.array(x, dtype=complex, copy=True)
    return x * np.sqrt(target / p)


def synth_ofdm_packet(
    cfg: OfdmConfig,
    scheme: ModScheme,
    imp: ImpairmentSpec,
    rng: np.random.Generator,
) -> tuple[np.ndarray, dict]:
    """One packet of ``cfg.block_size`` samples, power-normalized before the
    impairments are applied. Returns (samples, draw provenance)."""
    bits, syms = random_symbols(scheme, cfg.n_symbols * cfg.n_subcarriers, rng)
    x = ofdm_modulate(syms.reshape(cfg.n_symbols, cfg.n_subcarriers), cfg)
    x = apply_impairments(normalize_power(x), imp, cfg.symbol_len)
    info = {
        "scheme": scheme,
        "bits": bits,
        "amplitude": imp.amplitude,
        "phase": imp.phase,
        "cfo": imp.cfo,
        "timing_offset": imp.timing_offset,
    }
    return x, info
