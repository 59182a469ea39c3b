"""Hadamard spaces: Euclidean, hyperbolic (hyperboloid model), SPD, products."""

from .base import InvalidPoint, InvalidTangent, Manifold, SpaceMismatch
from .euclidean import Euclidean
from .hyperbolic import Hyperbolic, minkowski
from .linalg import jacobi_eigh, sqrt_and_inv_sqrt, sym_fn
from .product import Product
from .spd import SPD

__all__ = [
    "Manifold", "Euclidean", "Hyperbolic", "SPD", "Product",
    "SpaceMismatch", "InvalidPoint", "InvalidTangent",
    "jacobi_eigh", "sym_fn", "sqrt_and_inv_sqrt", "minkowski", "space_from_name",
]


def space_from_name(name: str) -> Manifold:
    """Spaces addressable from the command line: e2, e3, h2, h3, spd2, spd3, h2xr."""
    table = {
        "e2": lambda: Euclidean(2),
        "e3": lambda: Euclidean(3),
        "h2": lambda: Hyperbolic(2),
        "h3": lambda: Hyperbolic(3),
        "spd2": lambda: SPD(2),
        "spd3": lambda: SPD(3),
        "h2xr": lambda: Product(Hyperbolic(2), Euclidean(1)),
    }
    try:
        return table[name.lower()]()
    except KeyError:
        raise ValueError(f"unknown space {name!r}; choose from {sorted(table)}") from None
