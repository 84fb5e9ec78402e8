"""Seeded random draws and the named operator ensembles.

All randomness goes through :func:`rng`, a Philox (counter-based) generator
keyed by ``(seed, *index)``. Any sub-stream can be recreated from its index
alone, so a sweep split across workers draws the same numbers as a serial
one.
"""

from __future__ import annotations

import numpy as np

from . import matcore as mc
from .jacobi import BlockJacobiOperator, UnitaryChain


def rng(seed: int, *index: int) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), *(int(i) for i in index)])
    return np.random.Generator(np.random.Philox(ss))


def ginibre(gen: np.random.Generator, shape: tuple, l: int) -> np.ndarray:
    """Complex Gaussian matrices with ``E|a_ij|^2 = 1``."""
    z = gen.standard_normal((*shape, l, l, 2)) / np.sqrt(2.0)
    return z[..., 0] + 1j * z[..., 1]


def haar_unitary(gen: np.random.Generator, shape: tuple, l: int) -> np.ndarray:
    """Haar unitaries: Q factor of a Ginibre draw with positive-diagonal R."""
    return mc.qr_positive(ginibre(gen, shape, l)).q


def unit_disc(gen: np.random.Generator, shape: tuple, l: int) -> np.ndarray:
    """Entries uniform in the complex unit disc."""
    r = np.sqrt(gen.uniform(size=(*shape, l, l)))
    th = gen.uniform(0, 2 * np.pi, size=(*shape, l, l))
    return r * np.exp(1j * th)


def hermitian_unit(gen: np.random.Generator, shape: tuple, l: int) -> np.ndarray:
    """Random Hermitian matrices of unit operator norm."""
    h = mc.hermitian_part(ginibre(gen, shape, l))
    ev = np.linalg.eigvalsh(h)
    return h / np.max(np.abs(ev), axis=-1)[..., None, None]


def random_chain(gen: np.random.Generator, l: int, n: int) -> UnitaryChain:
    s = np.empty((n + 1, l, l), dtype=np.complex128)
    s[0] = mc.identity(l)
    s[1:] = haar_unitary(gen, (n,), l)
    return UnitaryChain(s)


def random_operator(gen: np.random.Generator, l: int, n: int,
                    smin: float = 0.5, smax: float = 2.0) -> BlockJacobiOperator:
    """Generic operator: ``A_n = U diag(s) V`` with ``s`` uniform in ``[smin, smax]``."""
    s = gen.uniform(smin, smax, size=(n, l))
    u = haar_unitary(gen, (n,), l)
    v = haar_unitary(gen, (n,), l)
    a = (u * s[:, None, :]) @ v
    b = mc.hermitian_part(ginibre(gen, (n,), l))
    return BlockJacobiOperator(a, b)


def _conjugated_type1(gen, l, n, deviation):
    """Type-1 blocks ``W diag(1 + d) W*`` with ``|d_i| <= deviation_n``."""
    w = haar_unitary(gen, (n,), l)
    d = 1.0 + deviation[:, None] * gen.uniform(-1.0, 1.0, size=(n, l))
    return (w * d[:, None, :]) @ mc.adjoint(w)


def nevai(gen: np.random.Generator, l: int, n: int, rate: float = 0.5,
          scale: float = 1.0, scramble: bool = True) -> BlockJacobiOperator:
    """Nevai-class ensemble with deviations of order ``n**-rate``.

    The block ``A_n`` is a random unitary conjugate of ``diag(1 + n**-rate, 1, ...)``
    with the remaining diagonal entries jittered inside the same envelope, and
    ``B_n = n**-1 * H_n`` for Hermitian ``H_n`` of unit norm. With ``scramble``
    the result is passed through a random equivalence so that none of the
    canonical shapes is present to begin with.
    """
    idx = np.arange(1, n + 1, dtype=float)
    dev = scale * idx**-rate
    w = haar_unitary(gen, (n,), l)
    d = np.ones((n, l))
    d[:, 0] += dev
    if l > 1:
        d[:, 1:] += dev[:, None] * gen.uniform(-0.5, 0.5, size=(n, l - 1))
    a = (w * d[:, None, :]) @ mc.adjoint(w)
    b = hermitian_unit(gen, (n,), l) / idx[:, None, None]
    j = BlockJacobiOperator(a, b)
    if scramble:
        from .jacobi import apply_equivalence
        j = apply_equivalence(j, random_chain(gen, l, n))
    return j


def l1(gen: np.random.Generator, l: int, n: int, rate: float = 2.0,
       scale: float = 0.25, scramble: bool = True) -> BlockJacobiOperator:
    """Summable ensemble: ``|1 - A_n A_n*| + |B_n| <= (3 + scale) * scale * n**-rate``.

    Type-1 blocks deviate from the identity by at most ``scale * n**-rate``
    and ``|B_n| = scale * n**-rate * u_n`` with ``u_n`` uniform in ``[0, 1]``.
    """
    if rate <= 1:
        raise ValueError("l1 ensemble needs rate > 1")
    if not 0 < scale < 1:
        raise ValueError("l1 ensemble needs 0 < scale < 1 to keep A_n invertible")
    idx = np.arange(1, n + 1, dtype=float)
    dev = scale * idx**-rate
    a = _conjugated_type1(gen, l, n, dev)
    b = hermitian_unit(gen, (n,), l) * (dev * gen.uniform(0, 1, size=n))[:, None, None]
    j = BlockJacobiOperator(a, b)
    if scramble:
        from .jacobi import apply_equivalence
        j = apply_equivalence(j, random_chain(gen, l, n))
    return j
