"""Symbolic verification and pseudospectral simulation of generalized KP and 2D Boussinesq line solitons."""

__version__ = "0.1.0"
