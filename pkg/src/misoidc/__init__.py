"""Beamforming for the two-user MISO interference channel with interference decoding."""

__version__ = "0.1.0"
