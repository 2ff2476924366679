from .channel import ChannelModel, apply_channel, convolve_taps
from .interferers import (
    BARKER_11,
    DsssSpec,
    MtiSpec,
    dbpsk_encode,
    draw_overlap_count,
    synth_dsss,
    synth_mti,
    synth_ofdm_interferer,
)
from .mixing import complex_awgn, mix, mix_parts, power
from .modulation import ModScheme, constellation, demap_symbols, map_symbols, random_symbols
from .ofdm import (
    ImpairmentSpec,
    OfdmConfig,
    apply_impairments,
    normalize_power,
    ofdm_demodulate,
    ofdm_modulate,
    synth_ofdm_packet,
)

__all__ = [
    "BARKER_11",
    "ChannelModel",
    "DsssSpec",
    "ImpairmentSpec",
    "ModScheme",
    "MtiSpec",
    "OfdmConfig",
    "apply_channel",
    "apply_impairments",
    "complex_awgn",
    "constellation",
    "convolve_taps",
    "dbpsk_encode",
    "demap_symbols",
    "draw_overlap_count",
    "map_symbols",
    "mix",
    "mix_parts",
    "normalize_power",
    "ofdm_demodulate",
    "ofdm_modulate",
    "power",
    "random_symbols",
    "synth_dsss",
    "synth_mti",
    "synth_ofdm_interferer",
    "synth_ofdm_packet",
]
