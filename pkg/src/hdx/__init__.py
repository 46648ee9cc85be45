"""Finite simplicial complexes, cochains over finite groups and their expansion."""

from .cochains import (
    BudgetExceeded,
    Cochain,
    Space,
    coboundary,
    distance,
    distance_to_space,
    enumerate_space,
    weight,
)
from .complex import (
    ComplexError,
    SimplicialComplex,
    build_complex,
    color_restriction,
    complete_complex,
    link,
    star,
)
from .groups import FiniteGroup, cyclic, direct_product, group_from_name, symmetric

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded",
    "Cochain",
    "ComplexError",
    "FiniteGroup",
    "SimplicialComplex",
    "Space",
    "build_complex",
    "coboundary",
    "color_restriction",
    "complete_complex",
    "cyclic",
    "direct_product",
    "distance",
    "distance_to_space",
    "enumerate_space",
    "group_from_name",
    "link",
    "star",
    "symmetric",
    "weight",
]
