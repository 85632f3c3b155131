"""Cyclicity of polynomials in Dirichlet-type spaces on the unit ball of C^2."""

__version__ = "0.1.0"

from .classify import Verdict, classify, decide
from .dalpha import AlphaWeight, inner, norm_sq, weight
from .parse import format_poly, parse_poly
from .poly2 import (
    Poly2,
    TruncatedSeries2,
    UnitarySpec,
    add,
    compose_unitary,
    dilate,
    differentiate,
    evaluate,
    multiply,
    reciprocal,
)

__all__ = [
    "__version__",
    "AlphaWeight",
    "Poly2",
    "TruncatedSeries2",
    "UnitarySpec",
    "Verdict",
    "add",
    "classify",
    "compose_unitary",
    "decide",
    "dilate",
    "differentiate",
    "evaluate",
    "format_poly",
    "inner",
    "multiply",
    "norm_sq",
    "parse_poly",
    "reciprocal",
    "weight",
]
