"""Transformer token classifier speaking the storymatch labeler protocol."""

__version__ = "0.1.0"
