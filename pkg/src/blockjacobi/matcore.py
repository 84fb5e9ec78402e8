"""Dense complex matrix kernel for small blocks.

Every routine accepts either a single ``(l, l)`` array or a stack
``(..., l, l)`` and works elementwise over the leading axes, so the
property sweeps in :mod:`blockjacobi.inequalities` can push ``10**5``
matrices through one call.

Matrices are plain ``complex128`` numpy arrays. Factorizations come back as
named tuples in the style of ``numpy.linalg``.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import NearSingular, NoConvergence, NotPSD
from .tolerances import DEFAULT, Tolerances


class PolarFactors(NamedTuple):
    """Left polar decomposition ``t = p @ u``; ``p = sqrt(t t*)``."""

    p: np.ndarray
    u: np.ndarray


class SvdFactors(NamedTuple):
    """``a = u @ diag(sigma) @ v*`` with ``sigma`` descending."""

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray


class QRFactors(NamedTuple):
    """``a = q @ r``; ``r`` upper triangular with real positive diagonal."""

    q: np.ndarray
    r: np.ndarray


def as_matrix(a, *, batched: bool = True) -> np.ndarray:
    """Coerce to a finite complex square matrix (or stack of them)."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2] or m.shape[-1] < 1:
        raise ValueError(f"expected square matrices, got shape {m.shape}")
    if not batched and m.ndim != 2:
        raise ValueError(f"expected a single matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def identity(l: int) -> np.ndarray:
    return np.eye(l, dtype=np.complex128)


def adjoint(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + adjoint(a))


def hs_norm(a):
    """Hilbert-Schmidt (Frobenius) norm ``sqrt(Tr a a*)``."""
    a = np.asarray(a)
    out = np.sqrt(np.sum(a.real**2 + a.imag**2, axis=(-2, -1)))
    return float(out) if out.ndim == 0 else out


def op_norm(a, tol: Tolerances = DEFAULT):
    """Operator 2-norm: the largest singular value."""
    s = svdvals(a, tol)
    out = s[..., 0]
    return float(out) if np.ndim(out) == 0 else out


def _jacobi_sweeps(a: np.ndarray, want_v: bool, tol: Tolerances):
    """One-sided complex Jacobi: rotate columns until pairwise orthogonal.

    Returns the column-orthogonalized ``w = a @ v`` and the accumulated ``v``.
    """
    w = np.array(a, dtype=np.complex128, copy=True)
    l = w.shape[-1]
    v = np.broadcast_to(identity(l), w.shape).copy() if want_v else None
    if l == 1:
        return w, v
    pairs = [(p, q) for p in range(l - 1) for q in range(p + 1, l)]
    gram_tol = tol.svd_gram_tol
    for _ in range(tol.svd_max_sweeps):
        rotated = False
        for p, q in pairs:
            wp = w[..., :, p].copy()
            wq = w[..., :, q]
            alpha = np.sum(wp.real**2 + wp.imag**2, axis=-1)
            beta = np.sum(wq.real**2 + wq.imag**2, axis=-1)
            g = np.sum(np.conj(wp) * wq, axis=-1)
            absg = np.abs(g)
            active = absg > gram_tol * np.sqrt(alpha * beta)
            if not np.any(active):
                continue
            rotated = True
            safe = np.where(active, absg, 1.0)
            phase = np.where(active, g / safe, 1.0)
            zeta = (beta - alpha) / (2.0 * safe)
            sgn = np.where(zeta >= 0, 1.0, -1.0)
            t = np.where(active, sgn / (np.abs(zeta) + np.hypot(1.0, zeta)), 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = c * t
            c_ = c[..., None]
            s_ = s[..., None]
            ph = np.conj(phase)[..., None]
            wq_ph = wq * ph
            w[..., :, p] = c_ * wp - s_ * wq_ph
            w[..., :, q] = s_ * wp + c_ * wq_ph
            if want_v:
                vp = v[..., :, p].copy()
                vq_ph = v[..., :, q] * ph
                v[..., :, p] = c_ * vp - s_ * vq_ph
                v[..., :, q] = s_ * vp + c_ * vq_ph
        if not rotated:
            return w, v
    raise NoConvergence(f"one-sided Jacobi SVD did not converge in {tol.svd_max_sweeps} sweeps")


def svdvals(a, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Singular values only, descending."""
    w, _ = _jacobi_sweeps(as_matrix(a), False, tol)
    s = np.sqrt(np.sum(w.real**2 + w.imag**2, axis=-2))
    return -np.sort(-s, axis=-1)


def _complete_columns(u: np.ndarray, good: np.ndarray) -> np.ndarray:
    """Replace columns flagged ``~good`` so that ``u`` becomes unitary.

    Good columns are orthonormal already; the others are filled by
    Gram-Schmidt against the standard basis.
    """
    l = u.shape[-1]
    flat_u = u.reshape(-1, l, l)
    flat_good = good.reshape(-1, l)
    for b in np.nonzero(~flat_good.all(axis=-1))[0]:
        cols = [flat_u[b, :, j] for j in range(l) if flat_good[b, j]]
        basis = list(cols)
        for e in np.eye(l, dtype=np.complex128):
            if len(basis) == l:
                break
            x = e - sum(np.vdot(y, e) * y for y in basis)
            n = np.linalg.norm(x)
            if n > 1e-8:
                basis.append(x / n)
        it = iter(basis[len(cols):])
        for j in range(l):
            if not flat_good[b, j]:
                flat_u[b, :, j] = next(it)
    return flat_u.reshape(u.shape)


def svd(a, tol: Tolerances = DEFAULT) -> SvdFactors:
    """Singular value decomposition by one-sided Jacobi rotations."""
    a = as_matrix(a)
    w, v = _jacobi_sweeps(a, True, tol)
    s = np.sqrt(np.sum(w.real**2 + w.imag**2, axis=-2))
    order = np.argsort(-s, axis=-1, kind="stable")
    s = np.take_along_axis(s, order, axis=-1)
    idx = np.broadcast_to(order[..., None, :], w.shape)
    w = np.take_along_axis(w, idx, axis=-1)
    v = np.take_along_axis(v, idx, axis=-1)
    good = s > 0
    u = w / np.where(good, s, 1.0)[..., None, :]
    if not np.all(good):
        u = _complete_columns(u, good)
    return SvdFactors(u, s, v)


def _check_invertible(sigma: np.ndarray, tol: Tolerances, what: str):
    smax = sigma[..., 0]
    smin = sigma[..., -1]
    bad = ~(smin >= tol.singular_tol * smax) | (smax == 0)
    if np.any(bad):
        first = int(np.flatnonzero(bad)[0])
        ratio = float(np.ravel(np.where(smax > 0, smin / np.where(smax > 0, smax, 1.0), 0.0))[first])
        raise NearSingular(f"{what}: smallest/largest singular value ratio {ratio:.3e} "
                           f"is below {tol.singular_tol:.1e}", index=first, ratio=ratio)


def inverse(a, tol: Tolerances = DEFAULT) -> np.ndarray:
    a = as_matrix(a)
    _check_invertible(svdvals(a, tol), tol, "inverse")
    return np.linalg.inv(a)


def polar_left(t, tol: Tolerances = DEFAULT, max_iter: int = 100) -> PolarFactors:
    """Left polar decomposition ``t = |t| phi(t)`` with ``|t| = sqrt(t t*)``.

    The unitary factor comes from the scaled Newton iteration
    ``X <- (z X + X^{-*} / z) / 2`` (Frobenius-norm scaling, switched off
    close to convergence). The Newton limit is the same unitary for the left
    and right polar forms, and ``p = t u*`` then gives the left factor.
    """
    t = as_matrix(t)
    x = t.copy()
    scaling = True
    for _ in range(max_iter):
        try:
            xinv = np.linalg.inv(x)
        except np.linalg.LinAlgError as exc:
            raise NearSingular("polar_left: singular input") from exc
        if scaling:
            nx = hs_norm(x)
            ni = hs_norm(xinv)
            z = np.sqrt(np.asarray(ni) / np.asarray(nx))[..., None, None]
        else:
            z = 1.0
        x_new = 0.5 * (z * x + adjoint(xinv) / z)
        diff = np.max(np.asarray(hs_norm(x_new - x)) / np.asarray(hs_norm(x_new)))
        x = x_new
        if diff < 1e-2:
            scaling = False
        if diff <= 1e-9:
            break
    else:
        raise NoConvergence("polar_left: Newton iteration did not converge")
    # one cleanup step; Newton is self-correcting so this squares any residual error
    x = 0.5 * (x + adjoint(np.linalg.inv(x)))
    p = hermitian_part(t @ adjoint(x))
    ev = np.linalg.eigvalsh(p)
    bad = ~(ev[..., 0] >= tol.singular_tol * ev[..., -1])
    if np.any(bad):
        first = int(np.flatnonzero(bad)[0])
        ratio = float(np.ravel(ev[..., 0] / np.maximum(ev[..., -1], np.finfo(float).tiny))[first])
        raise NearSingular(f"polar_left: singular value ratio {ratio:.3e} below "
                           f"{tol.singular_tol:.1e}", index=first, ratio=ratio)
    return PolarFactors(p, x)


def phi(t, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Unitary factor of the left polar decomposition."""
    return polar_left(t, tol).u


def qr_positive(a, tol: Tolerances = DEFAULT) -> QRFactors:
    """Householder QR normalized so that ``diag(r)`` is real and positive."""
    a = as_matrix(a)
    l = a.shape[-1]
    r = a.copy()
    q = np.broadcast_to(identity(l), a.shape).copy()
    for k in range(l - 1):
        x = r[..., k:, k]
        nx = np.sqrt(np.sum(x.real**2 + x.imag**2, axis=-1))
        x0 = x[..., 0]
        ax0 = np.abs(x0)
        ph = np.where(ax0 > 0, x0 / np.where(ax0 > 0, ax0, 1.0), 1.0)
        vvec = x.copy()
        vvec[..., 0] = x0 + ph * nx
        nv2 = np.sum(vvec.real**2 + vvec.imag**2, axis=-1)
        live = nv2 > 0
        vvec = np.where(live[..., None], vvec / np.sqrt(np.where(live, nv2, 1.0))[..., None], 0.0)
        # H = 1 - 2 v v*, applied to the trailing rows of r and columns of q
        sub = r[..., k:, :]
        r[..., k:, :] = sub - 2.0 * vvec[..., :, None] * (np.conj(vvec)[..., None, :] @ sub)
        qs = q[..., :, k:]
        q[..., :, k:] = qs - 2.0 * (qs @ vvec[..., :, None]) * np.conj(vvec)[..., None, :]
    d = np.diagonal(r, axis1=-2, axis2=-1)
    ad = np.abs(d)
    scale = np.max(np.abs(r), axis=(-2, -1))
    bad = (ad.min(axis=-1) <= tol.singular_tol * scale) | (scale == 0)
    if np.any(bad):
        raise NearSingular("qr_positive: zero or negligible diagonal in r",
                           index=int(np.flatnonzero(bad)[0]))
    ph = d / ad
    q = q * ph[..., None, :]
    r = np.conj(ph)[..., :, None] * r
    r = np.triu(r)
    idx = np.arange(l)
    r[..., idx, idx] = r[..., idx, idx].real
    return QRFactors(q, r)


def _sort_eigs(ev: np.ndarray) -> np.ndarray:
    """Descending modulus, then descending real part, then imaginary part."""
    mod = np.abs(ev)
    scale = np.max(mod, axis=-1, keepdims=True)
    # quantize modulus and real part so rounding noise does not break ties
    s = np.where(scale > 0, scale, 1.0)
    q = np.round(mod / s, 12)
    re = np.round(ev.real / s, 12)
    order = np.lexsort((-ev.imag, -re, -q), axis=-1)
    return np.take_along_axis(ev, order, axis=-1)


def _charpoly_roots(a: np.ndarray) -> np.ndarray:
    return np.roots(np.poly(a)).astype(np.complex128)


def eigenvalues(a, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Eigenvalues with multiplicity, sorted by descending modulus.

    Hessenberg reduction plus shifted QR via LAPACK ``zgeev``; for ``l <= 3``
    a failed run falls back to characteristic-polynomial roots.
    """
    a = as_matrix(a)
    try:
        ev = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        if a.shape[-1] > 3:
            raise NoConvergence("eigenvalues: QR iteration failed") from exc
        flat = a.reshape(-1, a.shape[-1], a.shape[-1])
        ev = np.stack([_charpoly_roots(m) for m in flat]).reshape(a.shape[:-1])
    return _sort_eigs(np.asarray(ev, dtype=np.complex128))


def sqrt_psd(a, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Principal square root of a Hermitian positive semidefinite matrix."""
    a = as_matrix(a)
    scale = np.maximum(hs_norm(a), np.finfo(float).tiny)
    if np.any(np.asarray(hs_norm(a - adjoint(a))) > tol.herm_tol * np.asarray(scale)):
        raise NotPSD("sqrt_psd: input is not Hermitian")
    w, vecs = np.linalg.eigh(hermitian_part(a))
    if np.any(w[..., 0] < -tol.pos_tol * np.max(np.abs(w), axis=-1)):
        raise NotPSD(f"sqrt_psd: negative eigenvalue {float(np.min(w[..., 0])):.3e}")
    root = np.sqrt(np.clip(w, 0.0, None))
    return hermitian_part((vecs * root[..., None, :]) @ adjoint(vecs))


def is_unitary(u, tol: Tolerances = DEFAULT) -> bool:
    u = np.asarray(u)
    l = u.shape[-1]
    return bool(np.all(np.asarray(hs_norm(adjoint(u) @ u - identity(l))) <= tol.unitary_tol * l))


def matrix_to_json(a) -> dict:
    a = as_matrix(a, batched=False)
    return {
        "dim": int(a.shape[0]),
        "entries": [[[float(z.real), float(z.imag)] for z in row] for row in a],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    entries = np.asarray(obj["entries"], dtype=np.float64)
    dim = int(obj["dim"])
    if entries.shape != (dim, dim, 2):
        raise ValueError(f"matrix json: entries shape {entries.shape} does not match dim {dim}")
    return as_matrix(entries[..., 0] + 1j * entries[..., 1], batched=False)
