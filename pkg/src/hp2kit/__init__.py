"""Tools for small simplicial complexes, symmetric searches and triple flips."""

__version__ = "0.1.0"
