"""Semi-infinite polynomial optimization via moment relaxations.

Solves min { f(x) : g(x, y) <= 0 for all y in Y_x } for polynomial data
over compact semi-algebraic sets: a marginal-pinned moment relaxation
produces a polynomial upper approximant of the inner maximum, the outer
problem is handled by a moment relaxation hierarchy with minimizer
extraction, and an epsilon-adjustment loop certifies feasibility of the
result with a separate moment relaxation per candidate.
"""

from .polynomials import MonomialBasis, Polynomial, monomial_basis, substitute_x
from .moments import (
    LocalizerStructure,
    MomentSequence,
    localizer_structure,
    localizing_matrix,
    moment_matrix,
    riesz,
)

__version__ = "0.1.0"

__all__ = [
    "MonomialBasis",
    "Polynomial",
    "monomial_basis",
    "substitute_x",
    "LocalizerStructure",
    "MomentSequence",
    "localizer_structure",
    "localizing_matrix",
    "moment_matrix",
    "riesz",
    "__version__",
]
