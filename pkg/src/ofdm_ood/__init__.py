"""Out-of-distribution detection of weak co-channel interference in OFDM packets."""

__version__ = "0.1.0"
