"""Harmonic shears of power-transformed analytic maps on the unit disk."""

from __future__ import annotations

__version__ = "0.1.0"
