"""Canonical forms and asymptotics of block Jacobi matrices."""

__version__ = "0.1.0"

from .jacobi import (  # noqa: E402
    BlockJacobiOperator,
    CanonicalResult,
    Kind,
    UnitaryChain,
    apply_equivalence,
    canonicalize,
    canonicalize_type1,
    canonicalize_type2,
    canonicalize_type3,
    chain_between,
    classify,
    truncation_spectrum,
)
from .tolerances import DEFAULT, Tolerances  # noqa: E402

__all__ = [
    "BlockJacobiOperator",
    "CanonicalResult",
    "Kind",
    "UnitaryChain",
    "apply_equivalence",
    "canonicalize",
    "canonicalize_type1",
    "canonicalize_type2",
    "canonicalize_type3",
    "chain_between",
    "classify",
    "truncation_spectrum",
    "Tolerances",
    "DEFAULT",
]
