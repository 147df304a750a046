"""Exact certificates for cylinder isomorphisms and Ga-actions on affine varieties."""

__version__ = "0.1.0"
