"""Generalized metric spaces valued in distance monoids.

Modules: ``ordinals`` (notations), ``monoid`` (distance monoids and their
completion), ``wspace`` (spaces, Cauchy sequences, completion), ``dynsys``
(non-expanding dynamics and the certified fixed-point search), ``treespace``
(trees, paths and tree metrics) and ``cli``.
"""

from .ordinals import OMEGA, OMEGA1, Ordinal, ordinal

__all__ = ["OMEGA", "OMEGA1", "Ordinal", "ordinal"]
__version__ = "0.1.0"
