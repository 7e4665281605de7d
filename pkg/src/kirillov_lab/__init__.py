"""Numerical laboratory for Kirillov-model vectors, shifted convolutions and moments on SL(2, Z)."""

__version__ = "0.1.0"
