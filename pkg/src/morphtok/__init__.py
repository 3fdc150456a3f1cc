"""Morphology-aware subword tokenization toolkit."""

__version__ = "0.1.0"
