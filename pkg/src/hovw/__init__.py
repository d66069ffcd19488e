"""Hierarchy-of-visual-words shape retrieval for binary logo images."""

__version__ = "0.1.0"

from .kernels import BACKEND  # noqa: E402,F401
