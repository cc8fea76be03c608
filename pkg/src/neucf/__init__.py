"""Closed-loop 2D reaching simulator: neural decision field + optimal-control bank."""

__version__ = "0.1.0"
