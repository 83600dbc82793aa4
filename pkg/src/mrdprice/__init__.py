"""Wholesale pricing under demand uncertainty via mean residual demand."""
__version__ = "0.1.0"
