"""Sketching toolkit for bounded edit distance: sketch two sequences
independently, then recover the exact distance and the canonical edit
script from the sketches alone."""

__version__ = "0.1.0"
