"""Synthesis and checking of data minimisers for small imperative programs."""

__version__ = "0.1.0"
