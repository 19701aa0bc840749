"""Exact computations on reduced residues, tuples of reduced residues and
residue-class systems modulo squarefree q: exponential-sum identities,
window moments, gap statistics and bound ratios."""

__version__ = "0.1.0"

from .arith import SquarefreeModulus, as_modulus, factor_squarefree, primorial
from .errors import (
    BudgetExceeded,
    ConfigError,
    EmptySet,
    NotSquarefree,
    PreconditionViolated,
    ResidueLabError,
    ZeroDensity,
)
from .gaps import GapStatistics, erdos_ratio, gap_statistics
from .moments import BoundReport, binomial_moment, moment_direct, moment_expsum_k2, theoretical_bound
from .special_sets import ResidueClassSystem, squares_profile, thm02_check, thm41_check
from .tuples import OffsetSet, density, phi_D, sieve_tuple_starts

__all__ = [
    "BoundReport", "BudgetExceeded", "ConfigError", "EmptySet", "GapStatistics",
    "NotSquarefree", "OffsetSet", "PreconditionViolated", "ResidueClassSystem",
    "ResidueLabError", "SquarefreeModulus", "ZeroDensity", "as_modulus", "binomial_moment",
    "density", "erdos_ratio", "factor_squarefree", "gap_statistics", "moment_direct",
    "moment_expsum_k2", "phi_D", "primorial", "sieve_tuple_starts", "squares_profile",
    "theoretical_bound", "thm02_check", "thm41_check",
]
