"""Generative fault detection for univariate 1 kHz sensor time series."""

__version__ = "0.1.0"
