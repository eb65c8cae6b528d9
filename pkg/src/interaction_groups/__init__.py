"""Interaction groups on finite-dimensional C*-algebras and their verification suites."""

__version__ = "0.1.0"

from .algebra import AlgState, FdAlgebra, LinMap, Subspace
from .groups import EMonomial, FiniteGroup, FreeAbelianGroup, cyclic, nf, symmetric
from .interaction import InteractionGroup
from .report import Check, Report

__all__ = [
    "AlgState", "Check", "EMonomial", "FdAlgebra", "FiniteGroup", "FreeAbelianGroup",
    "InteractionGroup", "LinMap", "Report", "Subspace", "cyclic", "nf", "symmetric",
]
