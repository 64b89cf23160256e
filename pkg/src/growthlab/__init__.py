"""Exact growth computations for concrete finitely generated groups."""

__version__ = "0.1.0"
