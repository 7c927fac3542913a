"""Exact arithmetic: rationals, prime fields, sparse polynomials, dense linear algebra."""

from .linalg import (
    nullspace_echelon,
    nullspace_echelon_mod,
    rank,
    rank_mod,
    rowspace_equal,
    rref,
    rref_mod,
)
from .modular import (
    MAX_MACHINE_PRIME,
    crt_combine,
    max_machine_prime,
    prev_prime,
    rational_reconstruct,
)
from .poly import (
    DEGREVLEX,
    LEX,
    MonomialOrder,
    Polynomial,
    PolySyntaxError,
    eval_poly,
    eval_poly_mod,
    format_poly,
    gen_poly,
    monomials_up_to_degree,
    parse_poly,
    substitute,
    to_residue,
)

__all__ = [
    "DEGREVLEX",
    "LEX",
    "MAX_MACHINE_PRIME",
    "MonomialOrder",
    "Polynomial",
    "PolySyntaxError",
    "crt_combine",
    "eval_poly",
    "eval_poly_mod",
    "format_poly",
    "gen_poly",
    "max_machine_prime",
    "monomials_up_to_degree",
    "nullspace_echelon",
    "nullspace_echelon_mod",
    "parse_poly",
    "prev_prime",
    "rank",
    "rank_mod",
    "rational_reconstruct",
    "rowspace_equal",
    "rref",
    "rref_mod",
    "substitute",
    "to_residue",
]
