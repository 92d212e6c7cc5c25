"""Exact q-expansion bases and quadric models for prime-level Cartan curves."""

__version__ = "0.1.0"
