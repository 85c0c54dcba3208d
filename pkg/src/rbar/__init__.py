"""Numerics for the compactified real line R-bar = R u R_Bohr and SU(2) holonomies."""

__version__ = "0.1.0"
