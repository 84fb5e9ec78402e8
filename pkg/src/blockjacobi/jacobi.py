"""Block Jacobi operators, unitary equivalence and the three canonical forms.

A finite truncation stores ``A_1..A_N`` and ``B_1..B_N`` as ``(N, l, l)``
arrays. Block indices in messages and error attributes are 1-based to match
the usual numbering of Jacobi parameters; array indices are 0-based.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import matcore as mc
from .errors import DimMismatch, InvalidOperator, NearSingular, NotEquivalent
from .tolerances import DEFAULT, Tolerances


class Kind(str, enum.Enum):
    TYPE1 = "type1"
    TYPE2 = "type2"
    TYPE3 = "type3"


def _frozen(x: np.ndarray) -> np.ndarray:
    x = np.array(x, dtype=np.complex128, copy=True)
    x.setflags(write=False)
    return x


@dataclass(frozen=True, eq=False)
class BlockJacobiOperator:
    """Truncated block Jacobi matrix with ``N`` blocks of size ``l``."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=np.complex128)
        b = np.asarray(self.b, dtype=np.complex128)
        if a.ndim != 3 or a.shape[-1] != a.shape[-2] or a.shape[0] < 1:
            raise DimMismatch(f"a_blocks must have shape (N, l, l), got {a.shape}")
        if b.shape != a.shape:
            raise DimMismatch(f"b_blocks shape {b.shape} differs from a_blocks {a.shape}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise InvalidOperator("non-finite Jacobi parameters")
        object.__setattr__(self, "a", _frozen(a))
        object.__setattr__(self, "b", _frozen(b))

    @property
    def block_size(self) -> int:
        return self.a.shape[-1]

    @property
    def length(self) -> int:
        return self.a.shape[0]

    def validate(self, tol: Tolerances = DEFAULT) -> "BlockJacobiOperator":
        """Check invertibility of every ``A_n`` and hermiticity of every ``B_n``."""
        try:
            mc._check_invertible(mc.svdvals(self.a, tol), tol, "A block")
        except NearSingular as exc:
            n = exc.index + 1
            raise NearSingular(f"A_{n} is not invertible: {exc}", n, exc.ratio) from None
        bnorm = np.asarray(mc.hs_norm(self.b))
        defect = np.asarray(mc.hs_norm(self.b - mc.adjoint(self.b)))
        bad = defect > tol.herm_tol * np.maximum(bnorm, 1.0)
        if np.any(bad):
            n = int(np.flatnonzero(bad)[0]) + 1
            raise InvalidOperator(f"B_{n} is not Hermitian (defect {defect[n - 1]:.3e})")
        return self

    def is_close(self, other: "BlockJacobiOperator", atol: float) -> bool:
        return (self.a.shape == other.a.shape
                and max_block_distance(self, other) <= atol)

    @classmethod
    def from_blocks(cls, a, b=None, tol: Tolerances = DEFAULT) -> "BlockJacobiOperator":
        a = np.asarray(a, dtype=np.complex128)
        if b is None:
            b = np.zeros_like(a)
        return cls(a, b).validate(tol)

    @classmethod
    def free(cls, l: int, n: int) -> "BlockJacobiOperator":
        """``A_n = 1``, ``B_n = 0``."""
        eye = np.broadcast_to(mc.identity(l), (n, l, l))
        return cls(eye, np.zeros((n, l, l)))

    def to_json(self) -> dict:
        return {
            "block_size": self.block_size,
            "blocks": [{"A": mc.matrix_to_json(a), "B": mc.matrix_to_json(b)}
                       for a, b in zip(self.a, self.b)],
        }

    @classmethod
    def from_json(cls, obj: dict, tol: Tolerances = DEFAULT) -> "BlockJacobiOperator":
        l = int(obj["block_size"])
        blocks = obj["blocks"]
        if not blocks:
            raise InvalidOperator("operator json has no blocks")
        a = np.stack([mc.matrix_from_json(blk["A"]) for blk in blocks])
        b = np.stack([mc.matrix_from_json(blk["B"]) for blk in blocks])
        if a.shape[-1] != l:
            raise DimMismatch(f"block_size {l} does not match matrix dim {a.shape[-1]}")
        return cls(a, b).validate(tol)


@dataclass(frozen=True, eq=False)
class UnitaryChain:
    """``sigma_1..sigma_{N+1}`` stored as an ``(N+1, l, l)`` array."""

    sigmas: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.sigmas, dtype=np.complex128)
        if s.ndim != 3 or s.shape[-1] != s.shape[-2] or s.shape[0] < 2:
            raise DimMismatch(f"chain must have shape (N+1, l, l) with N >= 1, got {s.shape}")
        if not np.array_equal(s[0], mc.identity(s.shape[-1])):
            raise ValueError("sigma_1 must be exactly the identity")
        object.__setattr__(self, "sigmas", _frozen(s))

    @property
    def block_size(self) -> int:
        return self.sigmas.shape[-1]

    @property
    def length(self) -> int:
        """Number of blocks ``N`` the chain acts on."""
        return self.sigmas.shape[0] - 1

    def validate(self, tol: Tolerances = DEFAULT) -> "UnitaryChain":
        l = self.block_size
        defect = np.asarray(mc.hs_norm(mc.adjoint(self.sigmas) @ self.sigmas - mc.identity(l)))
        bad = defect > tol.unitary_tol * l
        if np.any(bad):
            n = int(np.flatnonzero(bad)[0]) + 1
            raise ValueError(f"sigma_{n} is not unitary (defect {defect[n - 1]:.3e})")
        return self

    @classmethod
    def identity(cls, l: int, n: int) -> "UnitaryChain":
        return cls(np.broadcast_to(mc.identity(l), (n + 1, l, l)))

    def to_json(self) -> list:
        return [mc.matrix_to_json(s) for s in self.sigmas]

    @classmethod
    def from_json(cls, obj: list) -> "UnitaryChain":
        return cls(np.stack([mc.matrix_from_json(m) for m in obj]))


@dataclass(frozen=True, eq=False)
class CanonicalResult:
    canonical: BlockJacobiOperator
    chain: UnitaryChain
    kind: Kind
    # construction-specific side data, e.g. positivity margins of type-2 products
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = self.canonical.to_json()
        out["sigma"] = self.chain.to_json()
        out["kind"] = self.kind.value
        return out

    @classmethod
    def from_json(cls, obj: dict, tol: Tolerances = DEFAULT) -> "CanonicalResult":
        return cls(BlockJacobiOperator.from_json(obj, tol), UnitaryChain.from_json(obj["sigma"]),
                   Kind(obj["kind"]))


def max_block_distance(j: BlockJacobiOperator, k: BlockJacobiOperator) -> float:
    """Largest Hilbert-Schmidt distance between corresponding blocks."""
    return float(max(np.max(mc.hs_norm(j.a - k.a)), np.max(mc.hs_norm(j.b - k.b))))


def _check_dims(j: BlockJacobiOperator, chain: UnitaryChain):
    if chain.length != j.length or chain.block_size != j.block_size:
        raise DimMismatch(f"chain covers N={chain.length}, l={chain.block_size}; "
                          f"operator has N={j.length}, l={j.block_size}")


def apply_equivalence(j: BlockJacobiOperator, chain: UnitaryChain) -> BlockJacobiOperator:
    """``A_n -> s_n* A_n s_{n+1}``, ``B_n -> s_n* B_n s_n``."""
    _check_dims(j, chain)
    s = chain.sigmas
    sh = mc.adjoint(s[:-1])
    return BlockJacobiOperator(sh @ j.a @ s[1:], mc.hermitian_part(sh @ j.b @ s[:-1]))


def partial_products(a: np.ndarray, rescale: bool = True) -> np.ndarray:
    """Running products ``A_1 ... A_n`` for every ``n``.

    With ``rescale`` each product is divided by its largest entry modulus;
    positive scalars leave the polar unitary factor unchanged and this keeps
    long products away from overflow.
    """
    out = np.empty_like(a)
    q = mc.identity(a.shape[-1])
    for n in range(a.shape[0]):
        q = q @ a[n]
        if rescale:
            q = q / np.max(np.abs(q))
        out[n] = q
    return out


def _is_hermitian(x: np.ndarray, tol: float) -> np.ndarray:
    return np.asarray(mc.hs_norm(x - mc.adjoint(x))) <= tol * np.maximum(mc.hs_norm(x), 1e-300)


def _is_positive(x: np.ndarray, tol: Tolerances) -> np.ndarray:
    ev = np.linalg.eigvalsh(mc.hermitian_part(x))
    return _is_hermitian(x, tol.herm_tol) & (ev[..., 0] > tol.pos_tol * np.abs(ev[..., -1]))


def classify(j: BlockJacobiOperator, tol: Tolerances = DEFAULT) -> set[Kind]:
    """Which of the three canonical shapes the operator already has."""
    kinds = set()
    if np.all(_is_positive(j.a, tol)):
        kinds.add(Kind.TYPE1)
    if np.all(_is_positive(partial_products(j.a), tol)):
        kinds.add(Kind.TYPE2)
    norms = np.asarray(mc.hs_norm(j.a))[:, None]
    iu = np.triu_indices(j.block_size, 1)
    upper = np.abs(j.a[:, iu[0], iu[1]])
    diag = np.diagonal(j.a, axis1=-2, axis2=-1)
    lower_ok = np.all(upper <= tol.tri_tol * norms)
    diag_ok = np.all(np.abs(diag.imag) <= tol.tri_tol * norms) and np.all(diag.real > tol.pos_tol * norms)
    if lower_ok and diag_ok:
        kinds.add(Kind.TYPE3)
    return kinds


def _reindex(exc: NearSingular, n: int, what: str) -> NearSingular:
    return NearSingular(f"{what} at block {n}: {exc}", index=n, ratio=exc.ratio)


def canonicalize_type1(j: BlockJacobiOperator, tol: Tolerances = DEFAULT) -> CanonicalResult:
    """Every ``A_n`` made positive definite by left polar factors."""
    j.validate(tol)
    l, N = j.block_size, j.length
    sig = np.empty((N + 1, l, l), dtype=np.complex128)
    sig[0] = mc.identity(l)
    at = np.empty_like(j.a)
    for n in range(N):
        m = mc.adjoint(sig[n]) @ j.a[n]
        try:
            p, u = mc.polar_left(m, tol)
        except NearSingular as exc:
            raise _reindex(exc, n + 1, "type-1 polar step") from None
        sig[n + 1] = mc.adjoint(u)
        at[n] = p
    bt = mc.hermitian_part(mc.adjoint(sig[:-1]) @ j.b @ sig[:-1])
    return CanonicalResult(BlockJacobiOperator(at, bt), UnitaryChain(sig), Kind.TYPE1)


def canonicalize_type2(j: BlockJacobiOperator, tol: Tolerances = DEFAULT) -> CanonicalResult:
    """Every partial product ``A_1...A_n`` made positive definite.

    ``sigma_{n+1} = phi(A_1...A_n)*``; the partial products of the output are
    then ``|A_1...A_n|``. Since each ``sigma_{n+1}`` depends only on the
    partial product, all polar factors are computed in one batched call.

    ``diagnostics["min_rel_eig"]`` holds ``lambda_min / lambda_max`` of each
    rescaled ``|Q_n|``; indices where it falls below ``pos_tol`` are listed
    under ``diagnostics["flagged"]`` instead of being rejected.
    """
    j.validate(tol)
    l, N = j.block_size, j.length
    q = partial_products(j.a, rescale=True)
    try:
        p, u = mc.polar_left(q, tol)
    except NearSingular as exc:
        raise _reindex(exc, (exc.index or 0) + 1, "type-2 partial product") from None
    sig = np.empty((N + 1, l, l), dtype=np.complex128)
    sig[0] = mc.identity(l)
    sig[1:] = mc.adjoint(u)
    at = mc.adjoint(sig[:-1]) @ j.a @ sig[1:]
    bt = mc.hermitian_part(mc.adjoint(sig[:-1]) @ j.b @ sig[:-1])
    ev = np.linalg.eigvalsh(p)
    rel = ev[:, 0] / ev[:, -1]
    diagnostics = {
        "min_rel_eig": rel,
        "flagged": [int(n) + 1 for n in np.flatnonzero(rel <= tol.pos_tol)],
    }
    return CanonicalResult(BlockJacobiOperator(at, bt), UnitaryChain(sig), Kind.TYPE2, diagnostics)


def canonicalize_type3(j: BlockJacobiOperator, tol: Tolerances = DEFAULT) -> CanonicalResult:
    """Every ``A_n`` made lower triangular with positive diagonal.

    Step ``n`` factors ``(sigma_n* A_n)* = q r`` and sets ``sigma_{n+1} = q``,
    ``A_n -> r*``.
    """
    j.validate(tol)
    l, N = j.block_size, j.length
    sig = np.empty((N + 1, l, l), dtype=np.complex128)
    sig[0] = mc.identity(l)
    at = np.empty_like(j.a)
    for n in range(N):
        mh = mc.adjoint(j.a[n]) @ sig[n]
        try:
            qf, rf = mc.qr_positive(mh, tol)
        except NearSingular as exc:
            raise _reindex(exc, n + 1, "type-3 QR step") from None
        sig[n + 1] = qf
        at[n] = mc.adjoint(rf)
    bt = mc.hermitian_part(mc.adjoint(sig[:-1]) @ j.b @ sig[:-1])
    return CanonicalResult(BlockJacobiOperator(at, bt), UnitaryChain(sig), Kind.TYPE3)


CANONICALIZERS = {
    Kind.TYPE1: canonicalize_type1,
    Kind.TYPE2: canonicalize_type2,
    Kind.TYPE3: canonicalize_type3,
}


def canonicalize(j: BlockJacobiOperator, kind: Kind | str | int, tol: Tolerances = DEFAULT) -> CanonicalResult:
    if isinstance(kind, int):
        kind = f"type{kind}"
    return CANONICALIZERS[Kind(kind)](j, tol)


def chain_between(j: BlockJacobiOperator, jt: BlockJacobiOperator,
                  tol: Tolerances = DEFAULT) -> UnitaryChain:
    """Recover the chain with ``jt = apply_equivalence(j, chain)``.

    Uses ``sigma_{n+1} = A_n^{-1} sigma_n At_n``. Each step is checked for
    unitarity and for ``Bt_n = sigma_n* B_n sigma_n``; the raw step is tested,
    then projected back onto the unitary group so rounding in the
    non-unitary direction is not fed into the next solve.

    Raises
    ------
    NotEquivalent
        At the first block where either check fails.
    """
    if j.a.shape != jt.a.shape:
        raise DimMismatch(f"operators have shapes {j.a.shape} and {jt.a.shape}")
    j.validate(tol)
    l, N = j.block_size, j.length
    sig = np.empty((N + 1, l, l), dtype=np.complex128)
    sig[0] = mc.identity(l)
    eye = mc.identity(l)
    for n in range(N):
        s = sig[n]
        bres = mc.hs_norm(jt.b[n] - mc.adjoint(s) @ j.b[n] @ s)
        if bres > tol.recon_tol * max(1.0, mc.hs_norm(j.b[n])):
            raise NotEquivalent(f"B_{n + 1} does not match sigma_{n + 1}* B_{n + 1} sigma_{n + 1} "
                                f"(residual {bres:.3e})", n + 1, float(bres))
        nxt = np.linalg.solve(j.a[n], s @ jt.a[n])
        ures = mc.hs_norm(mc.adjoint(nxt) @ nxt - eye)
        if ures > tol.unitary_tol * l:
            raise NotEquivalent(f"sigma_{n + 2} is not unitary (defect {ures:.3e})", n + 1, float(ures))
        sig[n + 1] = mc.phi(nxt, tol)
    return UnitaryChain(sig)


def truncation_spectrum(j: BlockJacobiOperator) -> np.ndarray:
    """Eigenvalues (ascending) of the ``Nl x Nl`` principal section."""
    return np.linalg.eigvalsh(dense_matrix(j))


def dense_matrix(j: BlockJacobiOperator) -> np.ndarray:
    l, N = j.block_size, j.length
    m = np.zeros((N * l, N * l), dtype=np.complex128)
    for n in range(N):
        sl = slice(n * l, (n + 1) * l)
        m[sl, sl] = j.b[n]
        if n + 1 < N:
            nx = slice((n + 1) * l, (n + 2) * l)
            m[sl, nx] = j.a[n]
            m[nx, sl] = mc.adjoint(j.a[n])
    return mc.hermitian_part(m)
