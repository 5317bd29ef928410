"""Transfer-function synthesis for bit-vector basic blocks."""

__version__ = "0.1.0"
