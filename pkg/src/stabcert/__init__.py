"""Stability certificates for polyhedral variational problems."""
__version__ = "0.1.0"
