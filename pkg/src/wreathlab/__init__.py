"""Wreath products, lamplighter embeddings and random-walk experiments."""

__version__ = "0.1.0"
