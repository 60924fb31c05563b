"""Positive equality-free first-order logic over finite structures."""

__version__ = "0.1.0"
