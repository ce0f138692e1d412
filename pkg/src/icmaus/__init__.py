"""Multiple-alignment compression of symbol patterns."""

__version__ = "0.1.0"
