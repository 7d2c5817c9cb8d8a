"""Certification tools for the growth factor of Gaussian elimination with complete pivoting."""

__version__ = "0.1.0"
