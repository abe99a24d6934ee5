"""Trainable byte-level translator serving the ontoalign wire protocol."""

__version__ = "0.1.0"
