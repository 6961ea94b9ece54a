"""Desk-scale laboratory for suspension quotients of Cantor systems over
annulus maps: rotation numbers, uniform rigidity, staged-approximation
verification, entropy brackets, chain patterns and horseshoe certificates."""

__version__ = "0.1.0"
