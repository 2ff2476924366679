"""Gray-mapped subcarrier constellations with unit average symbol energy."""

from __future__ import annotations

import enum

import numpy as np


class ModScheme(enum.IntEnum):
    BPSK = 0
    QPSK = 1
    QAM16 = 2
    QAM64 = 3

    @property
    def bits_per_symbol(self) -> int:
        return (1, 2, 4, 6)[self.value]

    @classmethod
    def parse(cls, name: str) -> "ModScheme":
        key = name.strip().upper().replace("-", "")
        aliases = {"16QAM": "QAM16", "64QAM": "QAM64"}
        return cls[aliases.get(key, key)]


def _pam_levels(bits_per_axis: int) -> tuple[np.ndarray, np.ndarray]:
    """Amplitude per Gray-coded label for one axis.

    Label i sits at amplitude (M - 1 - 2i); the bit pattern carried by that
    point is gray(i), so bit 0 maps to +1 for BPSK.
    """
    m = 1 << bits_per_axis
    idx = np.arange(m)
    gray = idx ^ (idx >> 1)
    amplitude_by_gray = np.empty(m)
    amplitude_by_gray[gray] = (m - 1 - 2 * idx).astype(float)
    return amplitude_by_gray, gray


def _bits_to_int(bits: np.ndarray) -> np.ndarray:
    # MSB first along the last axis
    weights = 1 << np.arange(bits.shape[-1] - 1, -1, -1)
    return bits @ weights


def _int_to_bits(values: np.ndarray, width: int) -> np.ndarray:
    shifts = np.arange(width - 1, -1, -1)
    return ((values[..., None] >> shifts) & 1).astype(np.uint8)


def constellation(scheme: ModScheme) -> np.ndarray:
    """All points indexed by their integer bit label (MSB first)."""
    n = scheme.bits_per_symbol
    labels = np.arange(1 << n)
    return map_symbols(_int_to_bits(labels, n).reshape(-1), scheme)


def map_symbols(bits, scheme: ModScheme) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64).reshape(-1)
    n = scheme.bits_per_symbol
    if bits.size % n:
        raise ValueError(
            f"{scheme.name} needs a multiple of {n} bits, got {bits.size}"
        )
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("bits must be 0 or 1")
    groups = bits.reshape(-1, n)
    if scheme is ModScheme.BPSK:
        return np.where(groups[:, 0] == 0, 1.0, -1.0).astype(complex)
    half = n // 2
    levels, _ = _pam_levels(half)
    i = levels[_bits_to_int(groups[:, :half])]
    q = levels[_bits_to_int(groups[:, half:])]
    # mean |s|^2 of the raw square lattice is 2(M^2 - 1)/3
    m = 1 << half
    scale = np.sqrt(2.0 * (m * m - 1) / 3.0)
    return (i + 1j * q) / scale


def demap_symbols(symbols, scheme: ModScheme) -> np.ndarray:
    """Hard nearest-point decisions back to bits."""
    symbols = np.asarray(symbols, dtype=complex).reshape(-1)
    points = constellation(scheme)
    nearest = np.argmin(np.abs(symbols[:, None] - points[None, :]), axis=1)
    return _int_to_bits(nearest, scheme.bits_per_symbol).reshape(-1)


def random_symbols(scheme: ModScheme, count: int, rng: np.random.Generator):
    """Draw uniform random bits and map them; returns (bits, symbols)."""
    bits = rng.integers(0, 2, size=count * scheme.bits_per_symbol, dtype=np.uint8)
    return bits, map_symbols(bits, scheme)
