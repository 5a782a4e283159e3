"""Modeling toolkit for cavity electro-optic transducers and the photonic link between them."""

__version__ = "0.1.0"
