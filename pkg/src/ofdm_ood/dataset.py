"""ID / outlier-exposure / test datasets, spectral preprocessing and file I/O.

A dataset is a dense grid of examples indexed ``[mod, sir_bin, batch, item]``;
each example is 960 complex samples stored as ``[960, 2]`` float32 plus a
fixed-width provenance record that is sufficient to re-synthesize it.
"""

from __future__ import annotations

import hashlib
import math
import os
import struct
from dataclasses import dataclass, field, replace
from typing import Iterator

import numpy as np

from .signal import (
    ChannelModel,
    DsssSpec,
    ImpairmentSpec,
    ModScheme,
    MtiSpec,
    OfdmConfig,
    apply_channel,
    mix_parts,
    power,
    synth_dsss,
    synth_mti,
    synth_ofdm_interferer,
    synth_ofdm_packet,
)

DEFAULT_SIR_DB = tuple(float(v) for v in range(0, 42, 3))
DEFAULT_SNR_DB = (5.0, 8.0, 15.0, 25.0)

INTERFERERS = ("none", "mti", "dsss", "ofdm")


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class DatasetKind:
    name: str
    interferer: str = "none"
    channel: bool = False

    def __post_init__(self):
        if self.name not in ("din", "dout-oe", "dout-test"):
            raise ValueError(f"unknown dataset kind {self.name!r}")
        expected = {"din": ("none",), "dout-oe": ("mti",), "dout-test": ("dsss", "ofdm")}
        if self.interferer not in expected[self.name]:
            raise ValueError(f"{self.name} cannot carry a {self.interferer!r} interferer")
        if self.channel and self.name != "dout-test":
            raise ValueError("channel effects apply to test interferers only")

    @classmethod
    def din(cls) -> "DatasetKind":
        return cls("din")

    @classmethod
    def dout_oe(cls) -> "DatasetKind":
        return cls("dout-oe", "mti")

    @classmethod
    def dout_test(cls, interferer: str, channel: bool) -> "DatasetKind":
        return cls("dout-test", interferer, bool(channel))

    @classmethod
    def test_variants(cls) -> list["DatasetKind"]:
        """The four test sets in table order: DSSS, DSSS+channel, OFDM, OFDM+channel."""
        return [cls.dout_test(i, c) for i in ("dsss", "ofdm") for c in (False, True)]

    @property
    def tag(self) -> int:
        if self.name == "din":
            return 0
        if self.name == "dout-oe":
            return 1
        return 2 + DatasetKind.test_variants().index(self)

    @classmethod
    def from_tag(cls, tag: int) -> "DatasetKind":
        if tag == 0:
            return cls.din()
        if tag == 1:
            return cls.dout_oe()
        variants = cls.test_variants()
        if not 2 <= tag < 2 + len(variants):
            raise DatasetError(f"unknown dataset kind tag {tag}")
        return variants[tag - 2]

    @property
    def label(self) -> str:
        if self.name != "dout-test":
            return self.name
        return f"dout-test-{self.interferer}{'-channel' if self.channel else ''}"

    @property
    def test_index(self) -> int | None:
        """1-based row of the test table, None for training kinds."""
        return self.tag - 1 if self.name == "dout-test" else None


@dataclass(frozen=True)
class DatasetSpec:
    n_mod: int = 4
    n_sir_bins: int = 14
    n_batches: int = 16
    batch_size: int = 64
    n_channels: int = 2
    sir_db: tuple = DEFAULT_SIR_DB
    snr_db: tuple = DEFAULT_SNR_DB
    base_seed: int = 0
    max_cfo: float = 1e-3
    ofdm: OfdmConfig = field(default_factory=OfdmConfig)

    def __post_init__(self):
        object.__setattr__(self, "sir_db", tuple(float(v) for v in self.sir_db))
        object.__setattr__(self, "snr_db", tuple(float(v) for v in self.snr_db))
        if not 1 <= self.n_mod <= len(ModScheme):
            raise ValueError(f"n_mod must lie in [1, {len(ModScheme)}]")
        if len(self.sir_db) != self.n_sir_bins:
            raise ValueError(f"sir grid has {len(self.sir_db)} values, expected {self.n_sir_bins}")
        if len(self.snr_db) != self.n_mod:
            raise ValueError(f"snr table has {len(self.snr_db)} values, expected {self.n_mod}")
        if self.n_batches < 0 or self.batch_size < 1:
            raise ValueError("n_batches must be >= 0 and batch_size >= 1")
        if self.n_channels != 2:
            raise ValueError("examples are complex: n_channels must be 2")
        if not 0 <= self.base_seed < 2**63:
            raise ValueError("base_seed must fit in 63 bits")

    @property
    def block_size(self) -> int:
        return self.ofdm.block_size

    @property
    def dims(self) -> tuple[int, int, int, int]:
        return (self.n_mod, self.n_sir_bins, self.n_batches, self.batch_size)

    @property
    def n_examples(self) -> int:
        return math.prod(self.dims)

    def grid_bytes(self) -> bytes:
        return np.asarray(self.sir_db + self.snr_db, dtype="<f8").tobytes()

    def grid_hash(self) -> bytes:
        return hashlib.sha256(self.grid_bytes()).digest()[:8]


RECORD_DTYPE = np.dtype(
    [
        ("seed", "<u8"),
        ("mod", "u1"),
        ("sir_bin", "u1"),
        ("interferer", "u1"),
        ("channel", "u1"),
        ("int_mod", "i1"),
        ("mti_tones", "u1"),
        ("int_delay", "<i2"),
        ("snr_db", "<f8"),
        ("sir_db", "<f8"),
        ("signal_power", "<f8"),
        ("interferer_power", "<f8"),
        ("noise_power", "<f8"),
        ("phase", "<f8"),
        ("cfo", "<f8"),
        ("int_phase", "<f8"),
        ("int_cfo", "<f8"),
    ]
)


@dataclass(frozen=True)
class PacketSpec:
    """Readable view of one provenance record."""

    seed: int
    modulation: ModScheme
    sir_bin: int
    interferer: str
    channel: bool
    snr_db: float
    sir_db: float
    signal_power: float
    interferer_power: float
    noise_power: float
    phase: float
    cfo: float
    int_modulation: ModScheme | None
    mti_tones: int
    int_delay: int
    int_phase: float
    int_cfo: float

    @classmethod
    def from_record(cls, rec) -> "PacketSpec":
        return cls(
            seed=int(rec["seed"]),
            modulation=ModScheme(int(rec["mod"])),
            sir_bin=int(rec["sir_bin"]),
            interferer=INTERFERERS[int(rec["interferer"])],
            channel=bool(rec["channel"]),
            snr_db=float(rec["snr_db"]),
            sir_db=float(rec["sir_db"]),
            signal_power=float(rec["signal_power"]),
            interferer_power=float(rec["interferer_power"]),
            noise_power=float(rec["noise_power"]),
            phase=float(rec["phase"]),
            cfo=float(rec["cfo"]),
            int_modulation=None if rec["int_mod"] < 0 else ModScheme(int(rec["int_mod"])),
            mti_tones=int(rec["mti_tones"]),
            int_delay=int(rec["int_delay"]),
            int_phase=float(rec["int_phase"]),
            int_cfo=float(rec["int_cfo"]),
        )

    @property
    def measured_sir_db(self) -> float:
        if self.interferer_power == 0:
            return math.inf
        return 10 * math.log10(self.signal_power / self.interferer_power)

    @property
    def measured_snr_db(self) -> float:
        if self.noise_power == 0:
            return math.inf
        return 10 * math.log10(self.signal_power / self.noise_power)


def example_seed(base_seed: int, kind: DatasetKind, heldout: bool, coords) -> int:
    ss = np.random.SeedSequence(base_seed, spawn_key=(kind.tag, int(heldout), *map(int, coords)))
    lo, hi = ss.generate_state(2, np.uint32)
    return int(lo) | (int(hi) << 32)


def synthesize_example(
    kind: DatasetKind,
    mod: int,
    sir_bin: int,
    snr_db: float,
    sir_db: float,
    seed: int,
    cfg: OfdmConfig = OfdmConfig(),
    max_cfo: float = 1e-3,
    channel: ChannelModel | None = None,
) -> tuple[np.ndarray, np.void]:
    """Build one normalized ``[block_size, 2]`` float32 example and its record."""
    rng = np.random.default_rng(seed)
    n = cfg.block_size
    rec = np.zeros((), dtype=RECORD_DTYPE)
    rec["seed"] = seed
    rec["mod"] = mod
    rec["sir_bin"] = sir_bin
    rec["interferer"] = INTERFERERS.index(kind.interferer)
    rec["channel"] = kind.channel
    rec["int_mod"] = -1
    rec["snr_db"] = snr_db

    imp = ImpairmentSpec.draw(rng, max_cfo)
    victim, _ = synth_ofdm_packet(cfg, ModScheme(mod), imp, rng)
    rec["phase"] = imp.phase
    rec["cfo"] = imp.cfo

    interferer = None
    if kind.interferer == "mti":
        mti = MtiSpec.draw(rng, cfg.n_subcarriers)
        interferer = synth_mti(mti, n)
        rec["mti_tones"] = mti.n_tones
    elif kind.interferer == "dsss":
        dsss = DsssSpec(
            phase=float(rng.uniform(0.0, 2 * np.pi)),
            cfo=float(rng.uniform(-max_cfo, max_cfo)) if max_cfo > 0 else 0.0,
        )
        offset = int(rng.integers(0, dsss.samples_per_symbol))
        interferer = synth_dsss(dsss, n, rng, chip_offset=offset)
        rec["int_phase"] = dsss.phase
        rec["int_cfo"] = dsss.cfo
        rec["int_delay"] = offset
    elif kind.interferer == "ofdm":
        interferer, info = synth_ofdm_interferer(cfg, rng, max_cfo)
        rec["int_mod"] = int(info["scheme"])
        rec["int_phase"] = info["phase"]
        rec["int_cfo"] = info["cfo"]
        rec["int_delay"] = info["delay"]
    if interferer is not None and kind.channel:
        interferer = apply_channel(interferer, channel or ChannelModel(), rng)

    if interferer is None:
        sir_db = math.inf
    s, i, w = mix_parts(victim, interferer, sir_db, snr_db, rng)
    rec["sir_db"] = sir_db
    rec["signal_power"] = power(s)
    rec["interferer_power"] = power(i)
    rec["noise_power"] = power(w)

    y = s + i + w
    y = y / math.sqrt(power(y))
    iq = np.stack([y.real, y.imag], axis=-1).astype(np.float32)
    return iq, rec


@dataclass
class Dataset:
    spec: DatasetSpec
    kind: DatasetKind
    iq: np.ndarray  # [n_mod, n_sir, n_batches, batch_size, block, 2] float32
    records: np.ndarray  # [n_mod, n_sir, n_batches, batch_size] RECORD_DTYPE
    heldout: bool = False

    def __post_init__(self):
        want = self.spec.dims + (self.spec.block_size, self.spec.n_channels)
        if self.iq.shape != want:
            raise DatasetError(f"iq shape {self.iq.shape} does not match dims {want}")
        if self.records.shape != self.spec.dims:
            raise DatasetError(f"record shape {self.records.shape} does not match {self.spec.dims}")

    @property
    def n_examples(self) -> int:
        return self.spec.n_examples

    @property
    def labels(self) -> np.ndarray:
        return self.records["mod"].astype(np.int64)

    def flat_iq(self) -> np.ndarray:
        return self.iq.reshape(-1, self.spec.block_size, self.spec.n_channels)

    def flat_labels(self) -> np.ndarray:
        return self.labels.reshape(-1)

    def packet(self, mod: int, sir_bin: int, batch: int, item: int) -> PacketSpec:
        return PacketSpec.from_record(self.records[mod, sir_bin, batch, item])

    def cell(self, mod: int, sir_bin: int) -> np.ndarray:
        """All examples of one (modulation, SIR bin) cell, ``[n, block, 2]``."""
        return self.iq[mod, sir_bin].reshape(-1, self.spec.block_size, self.spec.n_channels)

    def iter_cells(self) -> Iterator[tuple[int, int, np.ndarray]]:
        for m in range(self.spec.n_mod):
            for b in range(self.spec.n_sir_bins):
                yield m, b, self.cell(m, b)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.spec == other.spec
            and self.kind == other.kind
            and self.heldout == other.heldout
            and self.iq.tobytes() == other.iq.tobytes()
            and self.records.tobytes() == other.records.tobytes()
        )


def generate(spec: DatasetSpec, kind: DatasetKind, heldout: bool = False,
             channel: ChannelModel | None = None) -> Dataset:
    """Synthesize every cell of ``spec`` for ``kind``.

    ``heldout`` switches to a disjoint seed stream, so an ID evaluation set can
    be redrawn from the same base seed as the training set.
    """
    iq = np.empty(spec.dims + (spec.block_size, spec.n_channels), dtype=np.float32)
    records = np.empty(spec.dims, dtype=RECORD_DTYPE)
    for idx in np.ndindex(*spec.dims):
        m, b = idx[0], idx[1]
        seed = example_seed(spec.base_seed, kind, heldout, idx)
        sir = math.inf if kind.name == "din" else spec.sir_db[b]
        iq[idx], records[idx] = synthesize_example(
            kind, m, b, spec.snr_db[m], sir, seed, spec.ofdm, spec.max_cfo, channel
        )
    return Dataset(spec, kind, iq, records, heldout)


def resynthesize(ds: Dataset, mod: int, sir_bin: int, batch: int, item: int,
                 channel: ChannelModel | None = None) -> np.ndarray:
    """Rebuild one example from its stored provenance alone."""
    p = ds.packet(mod, sir_bin, batch, item)
    iq, _ = synthesize_example(
        ds.kind, int(p.modulation), p.sir_bin, p.snr_db, p.sir_db, p.seed,
        ds.spec.ofdm, ds.spec.max_cfo, channel,
    )
    return iq


def preprocess(iq, cfg: OfdmConfig = OfdmConfig()) -> np.ndarray:
    """``[..., 960, 2]`` IQ -> ``[..., 12, 64, 2]`` max-normalized sub-packet spectra.

    Each 80-sample row loses its first ``cp_len`` samples (the cyclic prefix),
    is transformed with a 64-point DFT, and the whole example is divided by its
    largest absolute real/imaginary value.
    """
    iq = np.asarray(iq, dtype=np.float32)
    if iq.shape[-2:] != (cfg.block_size, 2):
        raise ValueError(f"expected trailing shape ({cfg.block_size}, 2), got {iq.shape[-2:]}")
    lead = iq.shape[:-2]
    z = iq[..., 0].astype(np.float64) + 1j * iq[..., 1]
    rows = z.reshape(lead + (cfg.n_symbols, cfg.symbol_len))[..., cfg.cp_len:]
    spec = np.fft.fft(rows, axis=-1, norm="ortho")
    out = np.stack([spec.real, spec.imag], axis=-1)
    peak = np.abs(out).reshape(lead + (-1,)).max(axis=-1, initial=0.0)
    scale = np.where(peak > 0, peak, 1.0)
    out = out / scale.reshape(lead + (1, 1, 1))
    return out.astype(np.float32)


# ---------------------------------------------------------------- file format

MAGIC = b"OODIQDS\x00"
VERSION = 1
_HEADER = struct.Struct("<8sHBBBBHHIIIH8sQd8x")
assert _HEADER.size == 64


def _example_dtype(spec: DatasetSpec) -> np.dtype:
    return np.dtype([("iq", "<f4", (spec.block_size, spec.n_channels)), ("rec", RECORD_DTYPE)])


def write(ds: Dataset, path) -> None:
    spec = ds.spec
    header = _HEADER.pack(
        MAGIC, VERSION, ds.kind.tag, INTERFERERS.index(ds.kind.interferer),
        int(ds.kind.channel), int(ds.heldout), spec.n_mod, spec.n_sir_bins,
        spec.n_batches, spec.batch_size, spec.block_size, spec.n_channels,
        spec.grid_hash(), spec.base_seed, spec.max_cfo,
    )
    body = np.empty(spec.n_examples, dtype=_example_dtype(spec))
    body["iq"] = ds.flat_iq()
    body["rec"] = ds.records.reshape(-1)
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(spec.grid_bytes())
        fh.write(body.tobytes())
    os.replace(tmp, path)


def read_spec(path) -> tuple[DatasetSpec, DatasetKind, bool, int]:
    """Parse only the header; returns (spec, kind, heldout, payload offset)."""
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise DatasetError(f"{path}: truncated header ({len(head)} of {_HEADER.size} bytes)")
        (magic, version, tag, interferer, channel, heldout, n_mod, n_sir, n_batches,
         batch_size, block_size, n_channels, grid_hash, base_seed, max_cfo) = _HEADER.unpack(head)
        if magic != MAGIC:
            raise DatasetError(f"{path}: bad magic {magic!r}, not a dataset file")
        if version != VERSION:
            raise DatasetError(f"{path}: unsupported format version {version} (expected {VERSION})")
        n_grid = (n_sir + n_mod) * 8
        grid = fh.read(n_grid)
        if len(grid) < n_grid:
            raise DatasetError(
                f"{path}: truncated at byte offset {_HEADER.size + len(grid)} inside the SIR/SNR table"
            )
    values = np.frombuffer(grid, dtype="<f8")
    spec = DatasetSpec(
        n_mod=n_mod, n_sir_bins=n_sir, n_batches=n_batches, batch_size=batch_size,
        n_channels=n_channels, sir_db=tuple(values[:n_sir]), snr_db=tuple(values[n_sir:]),
        base_seed=base_seed, max_cfo=max_cfo,
    )
    if spec.grid_hash() != grid_hash:
        raise DatasetError(f"{path}: SIR/SNR table does not match its header hash")
    if spec.block_size != block_size:
        raise DatasetError(f"{path}: block size {block_size} unsupported (expected {spec.block_size})")
    kind = DatasetKind.from_tag(tag)
    if INTERFERERS.index(kind.interferer) != interferer or int(kind.channel) != channel:
        raise DatasetError(f"{path}: kind tag {tag} disagrees with interferer/channel flags")
    return spec, kind, bool(heldout), _HEADER.size + n_grid


def read(path) -> Dataset:
    spec, kind, heldout, offset = read_spec(path)
    dtype = _example_dtype(spec)
    size = os.path.getsize(path)
    expected = offset + spec.n_examples * dtype.itemsize
    if size < expected:
        k = (size - offset) // dtype.itemsize
        raise DatasetError(
            f"{path}: truncated at byte offset {size}: example {k} of {spec.n_examples} "
            f"is incomplete (file should be {expected} bytes)"
        )
    if size > expected:
        raise DatasetError(f"{path}: {size - expected} trailing bytes after the last example")
    body = np.fromfile(path, dtype=dtype, offset=offset, count=spec.n_examples)
    iq = np.ascontiguousarray(body["iq"]).reshape(spec.dims + (spec.block_size, spec.n_channels))
    records = np.ascontiguousarray(body["rec"]).reshape(spec.dims)
    return Dataset(spec, kind, iq, records, heldout)


def append_manifest(manifest_path, data_path, ds: Dataset) -> None:
    """One tab-separated row per written dataset."""
    new = not os.path.exists(manifest_path)
    with open(manifest_path, "a") as fh:
        if new:
            fh.write("# path\tkind\ttest_variant\tdims\tseed\theldout\n")
        variant = ds.kind.test_index or "-"
        dims = "x".join(map(str, ds.spec.dims + (ds.spec.block_size, ds.spec.n_channels)))
        fh.write(f"{data_path}\t{ds.kind.label}\t{variant}\t{dims}\t{ds.spec.base_seed}\t{int(ds.heldout)}\n")


def with_overrides(spec: DatasetSpec, **kw) -> DatasetSpec:
    return replace(spec, **{k: v for k, v in kw.items() if v is not None})
