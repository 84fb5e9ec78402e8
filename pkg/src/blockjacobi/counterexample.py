"""A type-1 operator whose chain to the type-2 form has no limit.

With ``D_k = diag((k + 1)/k, 1)`` and a unitary ``tau``, the blocks are
``A_1 = tau* D_1 tau`` followed, for each level ``j >= 1``, by the chunk::

    A_{2^j} .. A_{3 2^{j-1} - 1}       = D_{2^{j-1}}, ..., D_{2^j - 1}
    A_{3 2^{j-1}} .. A_{2^{j+1} - 1}   = D_{2^j - 1}^{-1}, ..., D_{2^{j-1}}^{-1}

Every chunk multiplies out to the identity and its first half to ``D_1``,
so the type-2 chain alternates between ``1`` (at ``n = 2^j``) and
``phi(tau* D_1 tau D_1)*`` (at ``n = 3 2^{j-1}``). The Nevai deviations still
go to zero, but their sum grows like the harmonic series.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import matcore as mc
from .asymptotics import decay_ratio, l1_sum, nevai_deviation
from .jacobi import BlockJacobiOperator, Kind, canonicalize_type2, classify
from .tolerances import DEFAULT, Tolerances


def rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class ExampleSpec:
    levels: int = 6
    tau: np.ndarray = field(default_factory=lambda: rotation(np.pi / 4))

    def __post_init__(self):
        if self.levels < 2:
            raise ValueError("levels must be >= 2")
        tau = mc.as_matrix(self.tau, batched=False)
        if tau.shape != (2, 2) or not mc.is_unitary(tau):
            raise ValueError("tau must be a 2x2 unitary")
        object.__setattr__(self, "tau", tau)

    @property
    def n_blocks(self) -> int:
        return 2 ** (self.levels + 1) - 1


def d_block(k: int) -> np.ndarray:
    return np.diag([(k + 1) / k, 1.0]).astype(np.complex128)


def d_inverse(k: int) -> np.ndarray:
    return np.diag([k / (k + 1), 1.0]).astype(np.complex128)


def block_labels(levels: int) -> list[tuple[int, int]]:
    """``(k, +1)`` for ``D_k`` and ``(k, -1)`` for ``D_k^{-1}``, for n = 2 .. 2^{levels+1}-1."""
    out = []
    for j in range(1, levels + 1):
        half = 2 ** (j - 1)
        out += [(k, 1) for k in range(half, 2 * half)]
        out += [(k, -1) for k in range(2 * half - 1, half - 1, -1)]
    return out


def build(spec: ExampleSpec) -> BlockJacobiOperator:
    blocks = [mc.adjoint(spec.tau) @ d_block(1) @ spec.tau]
    blocks += [d_block(k) if e > 0 else d_inverse(k) for k, e in block_labels(spec.levels)]
    a = np.stack(blocks)
    return BlockJacobiOperator(a, np.zeros_like(a))


def target_unitary(spec: ExampleSpec) -> np.ndarray:
    """``phi(tau* D_1 tau D_1)``; the chain sits at its adjoint on ``n = 3 2^{j-1}``."""
    return mc.phi(mc.adjoint(spec.tau) @ d_block(1) @ spec.tau @ d_block(1))


def positivity_defect(u: np.ndarray) -> float:
    """Distance of a unitary from being positive definite (``|u - 1|_HS``)."""
    return mc.hs_norm(u - mc.identity(u.shape[-1]))


def verify_nonconvergence(spec: ExampleSpec = ExampleSpec(), tol: Tolerances = DEFAULT,
                          atol: float = 1e-10, min_gap: float = 0.01) -> dict:
    """Run the type-2 construction and check both dyadic subsequences.

    Returns a report dict; ``report["ok"]`` is the conjunction of all checks.
    """
    j = build(spec)
    t2 = canonicalize_type2(j, tol)
    chain = t2.chain.sigmas
    eye = mc.identity(2)
    target = mc.adjoint(target_unitary(spec))

    levels = range(1, spec.levels + 1)
    # sigma_n is chain[n - 1]
    at_pow = {jj: chain[2**jj - 1] for jj in levels}
    at_three = {jj: chain[3 * 2 ** (jj - 1) - 1] for jj in levels}
    pow_err = {jj: mc.hs_norm(s - eye) for jj, s in at_pow.items()}
    three_err = {jj: mc.hs_norm(s - target) for jj, s in at_three.items()}
    spread = max(mc.hs_norm(s - at_three[1]) for s in at_three.values())
    gap = mc.hs_norm(at_pow[spec.levels] - at_three[spec.levels])

    nb, na = nevai_deviation(j, tol)
    chunk_max = [float(na[2**jj - 1: 2 ** (jj + 1) - 1].max()) for jj in levels]
    total, summands = l1_sum(j, tol)
    n = len(summands)
    partial = np.cumsum(summands)
    growth = float(partial[-1] - partial[n // 2 - 1])

    t2_dev = np.asarray(mc.op_norm(t2.canonical.a - eye, tol)).reshape(-1)

    checks = {
        "type1_only": classify(j, tol) == {Kind.TYPE1},
        "sigma_pow2_identity": max(pow_err.values()) <= atol,
        "sigma_three_constant": spread <= atol,
        "sigma_three_matches_target": max(three_err.values()) <= atol,
        "gap_exceeds_min": gap > min_gap,
        "nevai_chunks_decreasing": bool(np.all(np.diff(chunk_max) < 0)),
        "l1_growth": bool(growth >= 0.5 * np.log(2) * (1 - 0.2)),
    }
    return {
        "levels": spec.levels,
        "n_blocks": spec.n_blocks,
        "sigma_gap": gap,
        "positivity_defect": positivity_defect(target_unitary(spec)),
        "target_eigenvalues": [[float(z.real), float(z.imag)] for z in mc.eigenvalues(target_unitary(spec))],
        "max_err_sigma_pow2": max(pow_err.values()),
        "max_err_sigma_three": max(three_err.values()),
        "spread_sigma_three": spread,
        "nevai_chunk_max": chunk_max,
        "l1_total": total,
        "l1_growth_second_half": growth,
        "type2_dev_decay_ratio": decay_ratio(t2_dev),
        "checks": checks,
        "ok": all(checks.values()),
    }
