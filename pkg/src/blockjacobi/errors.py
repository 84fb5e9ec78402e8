"""Exception hierarchy shared by every module."""

from __future__ import annotations


class BlockJacobiError(Exception):
    """Base class for all library errors."""


class NearSingular(BlockJacobiError, ValueError):
    """A matrix that must be invertible fails the singular-value test.

    ``index`` is the (1-based) block index when the failure happened inside a
    sequential algorithm, otherwise ``None``.
    """

    def __init__(self, message: str, index: int | None = None, ratio: float | None = None):
        super().__init__(message)
        self.index = index
        self.ratio = ratio


class NoConvergence(BlockJacobiError, RuntimeError):
    pass


class NotPSD(BlockJacobiError, ValueError):
    pass


class DimMismatch(BlockJacobiError, ValueError):
    pass


class InvalidOperator(BlockJacobiError, ValueError):
    pass


class NotEquivalent(BlockJacobiError):
    """Two operators are not related by a unitary chain.

    Carries the first failing block index and the offending residual.
    """

    def __init__(self, message: str, index: int, residual: float):
        super().__init__(message)
        self.index = index
        self.residual = residual


class EigNotRealPositive(BlockJacobiError, ValueError):
    pass
