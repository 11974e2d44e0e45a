"""Segre quartic minitwistor spaces and the Einstein-Weyl space of their real lines."""

__version__ = "0.1.0"
