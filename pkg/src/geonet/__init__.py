"""Geodesic nets and multinets in the Euclidean plane."""

__version__ = "0.1.0"
