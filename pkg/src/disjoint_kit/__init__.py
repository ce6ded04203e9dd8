"""Finite disjointness relations, overlap-monics and discrete causal models."""

__version__ = "0.1.0"
