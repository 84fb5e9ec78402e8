"""Right-orthonormal matrix polynomials from the three-term recurrence.

With ``p_{-1} = 0``, ``A_0 = 1``, ``p_0 = 1``::

    x p_n = p_{n+1} A_{n+1}* + p_n B_{n+1} + p_{n-1} A_n

is solved for ``p_{n+1}`` by right-multiplying with ``(A_{n+1}*)^{-1}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import matcore as mc
from .jacobi import BlockJacobiOperator, UnitaryChain, apply_equivalence
from .tolerances import DEFAULT, Tolerances


@dataclass(frozen=True, eq=False)
class PolynomialSequence:
    point: complex
    values: np.ndarray  # (n_max + 1, l, l): p_0(x) ... p_{n_max}(x)
    # indices n where |p_n|_HS exceeded the overflow guard; values are not rescaled
    overflow: list[int] = field(default_factory=list)

    @property
    def n_max(self) -> int:
        return self.values.shape[0] - 1


def eval_sequence(j: BlockJacobiOperator, x: complex, n_max: int,
                  tol: Tolerances = DEFAULT) -> PolynomialSequence:
    """Evaluate ``p_0(x), ..., p_{n_max}(x)``; needs ``n_max <= N``."""
    if not 0 <= n_max <= j.length:
        raise ValueError(f"n_max={n_max} needs blocks up to A_{n_max}, operator has N={j.length}")
    l = j.block_size
    vals = np.empty((n_max + 1, l, l), dtype=np.complex128)
    vals[0] = mc.identity(l)
    prev = np.zeros((l, l), dtype=np.complex128)
    a_prev = mc.identity(l)
    overflow = []
    for n in range(n_max):
        cur = vals[n]
        rhs = x * cur - cur @ j.b[n] - prev @ a_prev
        # p_{n+1} A_{n+1}* = rhs  <=>  A_{n+1} p_{n+1}* = rhs*
        a_next = j.a[n]
        mc._check_invertible(mc.svdvals(a_next, tol), tol, f"A_{n + 1}")
        vals[n + 1] = mc.adjoint(np.linalg.solve(a_next, mc.adjoint(rhs)))
        if mc.hs_norm(vals[n + 1]) > tol.overflow_norm:
            overflow.append(n + 1)
        prev, a_prev = cur, a_next
    return PolynomialSequence(complex(x), vals, overflow)


def covariance_check(j: BlockJacobiOperator, chain: UnitaryChain, x: complex, n_max: int,
                     tol: Tolerances = DEFAULT) -> float:
    """``max_n |pt_n(x) - p_n(x) sigma_{n+1}|_HS`` for the transformed operator."""
    p = eval_sequence(j, x, n_max, tol).values
    pt = eval_sequence(apply_equivalence(j, chain), x, n_max, tol).values
    s = chain.sigmas[:n_max + 1]  # sigma_{n+1} sits at index n
    return float(np.max(mc.hs_norm(pt - p @ s)))
