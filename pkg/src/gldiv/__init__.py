"""Ginzburg-Landau energy with divergence penalization on curved 2D domains."""

__version__ = "0.1.0"
