"""Curvature of Kropina metrics F = alpha**2/beta, computed two independent ways."""

__version__ = "0.1.0"
