"""Exact ECH and algebraic capacities for convex toric domains and polarised surfaces."""
from .domains import convex_weights, parse_domain
from .ech_solver import ech_capacities
from .errors import ResourceLimit, ValidationError
from .surfaces import alg_capacities_abstract
from .toric import alg_capacities_toric, normal_fan

__version__ = "0.1.0"

__all__ = [
    "ResourceLimit",
    "ValidationError",
    "alg_capacities_abstract",
    "alg_capacities_toric",
    "convex_weights",
    "ech_capacities",
    "normal_fan",
    "parse_domain",
]
