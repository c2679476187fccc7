"""Laplacian eigenvalue distribution of trees around the average degree."""

__version__ = "0.1.0"
