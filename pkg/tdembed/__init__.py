"""Embeddings of Latin squares, MOLS and transversal designs in projective spaces over skew fields."""
from .errors import TDEmbedError

__version__ = "0.1.0"

__all__ = ["TDEmbedError", "__version__"]
