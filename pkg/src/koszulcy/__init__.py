"""Koszul duality, Hochschild invariants and Calabi-Yau checks in exact arithmetic."""

from .exact_linear import GF, QQ, SparseMatrix, Subspace

__all__ = ["GF", "QQ", "SparseMatrix", "Subspace"]
__version__ = "0.1.0"
