"""Co-channel interferer waveforms: DBPSK DSSS, multi-tone, and OFDM."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .modulation import ModScheme
from .ofdm import ImpairmentSpec, OfdmConfig, apply_impairments, normalize_power, synth_ofdm_packet

# 802.11 DSSS Barker sequence
BARKER_11 = np.array([1, -1, 1, 1, -1, 1, 1, 1, -1, -1, -1], dtype=float)


@dataclass
class DsssSpec:
    chips: np.ndarray = field(default_factory=lambda: BARKER_11.copy())
    samples_per_chip: int = 1
    amplitude: float = 1.0
    phase: float = 0.0
    cfo: float = 0.0
    data_bits: np.ndarray | None = None  # +-1 differential data; random if None

    def __post_init__(self):
        self.chips = np.asarray(self.chips, dtype=float)
        if not np.all(np.abs(self.chips) == 1.0):
            raise ValueError("chips must be +-1")
        if self.samples_per_chip < 1:
            raise ValueError("samples_per_chip must be >= 1")

    @property
    def spreading_length(self) -> int:
        return self.chips.size

    @property
    def samples_per_symbol(self) -> int:
        return self.chips.size * self.samples_per_chip


def dbpsk_encode(data: np.ndarray) -> np.ndarray:
    """x_m = x_{m-1} * d_m with reference x_{-1} = +1."""
    data = np.asarray(data, dtype=float)
    if not np.all(np.abs(data) == 1.0):
        raise ValueError("differential data must be +-1")
    return np.cumprod(data)


def synth_dsss(spec: DsssSpec, n_samples: int, rng: np.random.Generator,
               chip_offset: int = 0) -> np.ndarray:
    """Rectangular-pulse DBPSK DSSS; ``chip_offset`` starts mid-symbol."""
    if n_samples < spec.spreading_length:
        raise ValueError(
            f"n_samples={n_samples} shorter than spreading length {spec.spreading_length}"
        )
    sps = spec.samples_per_symbol
    n_sym = -(-(n_samples + chip_offset) // sps)
    if spec.data_bits is None:
        data = rng.choice([-1.0, 1.0], size=n_sym)
    else:
        data = np.resize(np.asarray(spec.data_bits, dtype=float), n_sym)
    symbols = dbpsk_encode(data)
    chip_wave = np.repeat(spec.chips, spec.samples_per_chip)
    baseband = (symbols[:, None] * chip_wave[None, :]).reshape(-1)
    baseband = baseband[chip_offset: chip_offset + n_samples]
    t = np.arange(n_samples)
    return spec.amplitude * baseband * np.exp(1j * (spec.phase + 2 * np.pi * spec.cfo * t))


@dataclass
class MtiSpec:
    """Multi-tone interferer with tones on subcarrier centers."""

    bins: np.ndarray
    phases: np.ndarray
    amplitude: float = 1.0
    n_subcarriers: int = 64

    def __post_init__(self):
        self.bins = np.asarray(self.bins, dtype=np.int64)
        self.phases = np.asarray(self.phases, dtype=float)
        if self.bins.shape != self.phases.shape:
            raise ValueError("one phase per tone required")
        if len(np.unique(self.bins)) != self.bins.size:
            raise ValueError("tone bins must be distinct")

    @property
    def n_tones(self) -> int:
        return int(self.bins.size)

    @property
    def overlap(self) -> float:
        """Fraction of the K subcarriers carrying a tone."""
        return self.n_tones / self.n_subcarriers

    @classmethod
    def draw(cls, rng: np.random.Generator, n_subcarriers: int = 64) -> "MtiSpec":
        q = draw_overlap_count(rng, n_subcarriers)
        bins = np.sort(rng.choice(n_subcarriers, size=q, replace=False))
        phases = rng.uniform(0.0, 2 * np.pi, size=q)
        return cls(bins=bins, phases=phases, n_subcarriers=n_subcarriers)


def draw_overlap_count(rng: np.random.Generator, n_subcarriers: int = 64) -> int:
    """q ~ U{K/8, ..., K}."""
    return int(rng.integers(n_subcarriers // 8, n_subcarriers, endpoint=True))


def synth_mti(spec: MtiSpec, n_samples: int, rng: np.random.Generator | None = None) -> np.ndarray:
    if spec.n_tones == 0:
        return np.zeros(n_samples, dtype=complex)
    # tones on the K-bin grid are K-periodic: one inverse DFT period, tiled
    k = spec.n_subcarriers
    coeffs = np.zeros(k, dtype=complex)
    coeffs[spec.bins % k] = np.exp(1j * spec.phases)
    period = np.fft.ifft(coeffs) * k
    return spec.amplitude * np.resize(period, n_samples)


def synth_ofdm_interferer(cfg: OfdmConfig, rng: np.random.Generator,
                          max_cfo: float = 1e-3) -> tuple[np.ndarray, dict]:
    """Another STA's OFDM packet with its own modulation, impairments and a
    random sample delay relative to the victim's symbol grid."""
    scheme = ModScheme(int(rng.integers(0, len(ModScheme))))
    delay = int(rng.integers(0, cfg.symbol_len))
    imp = ImpairmentSpec.draw(rng, max_cfo)
    long_cfg = OfdmConfig(cfg.n_subcarriers, cfg.cp_len, cfg.n_symbols + 1)
    x, info = synth_ofdm_packet(long_cfg, scheme, ImpairmentSpec(), rng)
    x = x[delay: delay + cfg.block_size]
    x = apply_impairments(normalize_power(x), imp, cfg.symbol_len)
    info.update(phase=imp.phase, cfo=imp.cfo, delay=delay)
    return x, info
