"""Wideband speech codec: wavelet-packet critical-band analysis, a perceptual
quantizer and embedded zero-tree re-encoders (EZW, SPIHT and AVDZ)."""

__version__ = "0.1.0"
