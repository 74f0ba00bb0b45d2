"""Markup-preserving machine translation pipeline and evaluation toolkit."""

__version__ = "0.1.0"
