"""Layered jamming schemes for secure GDoF with decoders and Monte Carlo checks."""

__version__ = "0.1.0"
