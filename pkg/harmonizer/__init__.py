"""Harmonizes heterogeneous document-layout annotation corpora into one target standard."""
__version__ = "0.1.0"
