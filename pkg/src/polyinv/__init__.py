"""Polynomial loop invariants by interpolation, with Groebner-basis certification."""

__version__ = "0.1.0"
