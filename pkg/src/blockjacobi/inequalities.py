"""Randomized checks of the matrix inequalities behind the main results.

* polar-factor perturbation bound
  ``|phi(B) - phi(BD)|_HS <= sqrt(|1 - D^{-1}|_HS^2 + |1 - D|_HS^2)``;
* singular value vs eigenvalue gap
  ``sum (s_j - |lambda_j|) <= c sum (1 - s_j)^2`` with empirical ``c``;
* ``|1 - A| <= c |1 - |A||`` for ``A`` with real positive spectrum;
* Weyl's facts ``s_1 >= |lambda_j| >= s_l`` and ``prod |lambda_j| = prod s_j``.

Single-matrix entry points return an :class:`InequalityTrial`. The
``*_sweep`` functions push large seeded samples through the same batched
code in chunks; chunk ``k`` of a sweep with seed ``s`` always draws from
``rng(s, k)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import matcore as mc
from .ensembles import ginibre, haar_unitary, hermitian_unit, rng
from .errors import EigNotRealPositive
from .tolerances import DEFAULT, Tolerances

CHUNK = 25_000


@dataclass
class InequalityTrial:
    lhs: float
    rhs: float
    witness: dict

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs > 0 else float("nan")


@dataclass
class SweepReport:
    inequality: str
    samples: int
    violations: int
    worst_margin: float
    witness: dict | None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "inequality": self.inequality,
            "samples": self.samples,
            "violations": self.violations,
            "worst_margin": self.worst_margin,
            "witness": self.witness,
            **self.extra,
        }


def _witness(**mats) -> dict:
    return {k: mc.matrix_to_json(v) for k, v in mats.items()}


def _chunks(samples: int):
    k = 0
    done = 0
    while done < samples:
        m = min(CHUNK, samples - done)
        yield k, m
        k += 1
        done += m


# -- polar-factor perturbation bound ---------------------------------------

def li_sides(b: np.ndarray, d: np.ndarray, tol: Tolerances = DEFAULT):
    """Batched ``(lhs, rhs)`` of the polar-factor bound."""
    l = b.shape[-1]
    eye = mc.identity(l)
    lhs = mc.hs_norm(mc.phi(b, tol) - mc.phi(b @ d, tol))
    rhs = np.sqrt(np.asarray(mc.hs_norm(eye - mc.inverse(d, tol))) ** 2
                  + np.asarray(mc.hs_norm(eye - d)) ** 2)
    return np.asarray(lhs), rhs


def li_gap(b, d, tol: Tolerances = DEFAULT) -> InequalityTrial:
    b = mc.as_matrix(b, batched=False)
    d = mc.as_matrix(d, batched=False)
    lhs, rhs = li_sides(b, d, tol)
    return InequalityTrial(float(lhs), float(rhs), _witness(B=b, D=d))


def _li_draw(gen: np.random.Generator, m: int, l: int):
    """``B`` Ginibre; ``D`` Ginibre, near-identity at log-uniform scales, or
    ill-conditioned positive, in equal thirds."""
    b = ginibre(gen, (m,), l)
    d = ginibre(gen, (m,), l)
    third = m // 3
    eps = np.exp(gen.uniform(np.log(1e-6), 0.0, size=third))[:, None, None]
    d[:third] = mc.identity(l) + eps * ginibre(gen, (third,), l)
    w = haar_unitary(gen, (third,), l)
    s = np.exp(gen.uniform(-3.0, 3.0, size=(third, l)))
    d[third:2 * third] = (w * s[:, None, :]) @ mc.adjoint(w)
    return b, d


def _well_conditioned(x: np.ndarray, limit: float) -> np.ndarray:
    s = mc.svdvals(x)
    return s[..., -1] > s[..., 0] / limit


def li_sweep(l: int, samples: int, seed: int, slack: float = 1e-12,
             cond_limit: float = 1e8, tol: Tolerances = DEFAULT) -> SweepReport:
    """Count violations of ``lhs <= rhs + slack`` on random pairs.

    Draws where ``B``, ``D`` or ``BD`` has condition number above
    ``cond_limit`` are redrawn (their count is reported as ``redrawn``).
    """
    violations = 0
    worst = np.inf
    witness = None
    redrawn = 0
    max_ratio = 0.0
    for k, m in _chunks(samples):
        gen = rng(seed, k)
        b, d = _li_draw(gen, m, l)
        ok = (_well_conditioned(b, cond_limit) & _well_conditioned(d, cond_limit)
              & _well_conditioned(b @ d, cond_limit))
        while not ok.all():
            bad = ~ok
            redrawn += int(bad.sum())
            nb, nd = _li_draw(gen, int(bad.sum()), l)
            b[bad], d[bad] = nb, nd
            ok = (_well_conditioned(b, cond_limit) & _well_conditioned(d, cond_limit)
                  & _well_conditioned(b @ d, cond_limit))
        lhs, rhs = li_sides(b, d, tol)
        margin = rhs - lhs
        violations += int(np.sum(margin < -slack))
        pos = rhs > 0
        if pos.any():
            max_ratio = max(max_ratio, float(np.max(lhs[pos] / rhs[pos])))
        i = int(np.argmin(margin))
        if margin[i] < worst:
            worst = float(margin[i])
            witness = _witness(B=b[i], D=d[i])
    return SweepReport("li", samples, violations, worst, witness,
                       {"l": l, "seed": seed, "slack": slack, "redrawn": redrawn,
                        "max_ratio": max_ratio})


# -- singular values vs eigenvalue moduli ----------------------------------

def singval_eig_sides(a: np.ndarray, tol: Tolerances = DEFAULT):
    """Batched ``(lhs, rhs_raw)``: ``sum(s - |lambda|)`` and ``sum (1 - s)^2``."""
    s = mc.svdvals(a, tol)
    lam = np.abs(mc.eigenvalues(a, tol))
    return np.sum(s - lam, axis=-1), np.sum((1.0 - s) ** 2, axis=-1)


def singval_eig_gap(a, tol: Tolerances = DEFAULT) -> InequalityTrial:
    a = mc.as_matrix(a, batched=False)
    lhs, rhs = singval_eig_sides(a, tol)
    return InequalityTrial(float(lhs), float(rhs), _witness(A=a))


def near_unitary(gen: np.random.Generator, m: int, l: int, max_eps: float = 0.5) -> np.ndarray:
    """``U (1 + eps H)``: HS distance ``eps <= max_eps`` from the unitary group."""
    u = haar_unitary(gen, (m,), l)
    h = hermitian_unit(gen, (m,), l)
    h = h / np.asarray(mc.hs_norm(h))[:, None, None]
    eps = gen.uniform(0.0, max_eps, size=m)[:, None, None]
    return u @ (mc.identity(l) + eps * h)


@dataclass
class CEstimate:
    value: float
    witness: dict | None
    empty: bool  # no sample had rhs_raw above the floor
    strata: dict
    samples: int
    min_lhs: float

    def to_json(self) -> dict:
        return {"estimate": self.value, "witness": self.witness, "empty": self.empty,
                "strata": self.strata, "samples": self.samples, "min_lhs": self.min_lhs}


def ratio_max(a: np.ndarray, tol: Tolerances = DEFAULT):
    """Largest ``lhs / rhs_raw`` over a stack (floor applied), its index and min lhs."""
    lhs, rhs = singval_eig_sides(a, tol)
    keep = rhs >= tol.rhs_floor
    r = np.where(keep, lhs / np.where(keep, rhs, 1.0), -np.inf)
    i = int(np.argmax(r))
    return (float(r[i]) if keep.any() else None), i, float(np.min(lhs))


def estimate_c(l: int, samples: int, seed: int, tol: Tolerances = DEFAULT,
               sampler: Callable | None = None, extra: np.ndarray | None = None) -> CEstimate:
    """Empirical constant: max of ``lhs / rhs_raw`` over a stratified sample.

    Half the draws lie within HS distance 1/2 of the unitary group, half are
    Ginibre. ``sampler(gen, m, l)`` replaces both strata; ``extra`` adds fixed
    matrices to the pool (e.g. a known witness).
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    best = None
    best_w = None
    strata = {}
    min_lhs = np.inf
    pools = []
    for k, m in _chunks(samples):
        gen = rng(seed, k)
        if sampler is not None:
            pools.append(("custom", sampler(gen, m, l)))
        else:
            h = m // 2
            pools.append(("near_unitary", near_unitary(gen, h, l)))
            pools.append(("ginibre", ginibre(gen, (m - h,), l)))
        for name, a in pools:
            if len(a) == 0:
                continue
            r, i, lo = ratio_max(a, tol)
            min_lhs = min(min_lhs, lo)
            if r is None:
                continue
            strata[name] = max(strata.get(name, -np.inf), r)
            if best is None or r > best:
                best, best_w = r, _witness(A=a[i])
        pools = []
    if extra is not None and len(extra):
        r, i, lo = ratio_max(mc.as_matrix(extra), tol)
        min_lhs = min(min_lhs, lo)
        if r is not None:
            strata["extra"] = r
            if best is None or r > best:
                best, best_w = r, _witness(A=mc.as_matrix(extra)[i])
    if best is None:
        return CEstimate(0.0, None, True, strata, samples, float(min_lhs))
    return CEstimate(best, best_w, False, strata, samples, float(min_lhs))


# -- |1 - A| vs |1 - |A|| for real positive spectrum -----------------------

def _gate(a: np.ndarray, tol: Tolerances) -> np.ndarray:
    lam = mc.eigenvalues(a, tol)
    return np.all((np.abs(lam.imag) <= tol.eig_real_tol * np.abs(lam)) & (lam.real > 0), axis=-1)


def triangular_sides(a: np.ndarray, tol: Tolerances = DEFAULT):
    """Batched ``(lhs, rhs_raw) = (|1 - a|_HS, |1 - sqrt(a a*)|_HS)``."""
    eye = mc.identity(a.shape[-1])
    modulus = mc.polar_left(a, tol).p
    return np.asarray(mc.hs_norm(eye - a)), np.asarray(mc.hs_norm(eye - modulus))


def triangular_bound(a, tol: Tolerances = DEFAULT) -> InequalityTrial:
    a = mc.as_matrix(a, batched=False)
    if not _gate(a, tol):
        raise EigNotRealPositive(f"eigenvalues {mc.eigenvalues(a, tol)} are not all real and positive")
    lhs, rhs = triangular_sides(a, tol)
    return InequalityTrial(float(lhs), float(rhs), _witness(A=a))


def similar_triangular(gen: np.random.Generator, m: int, l: int, max_cond: float = 100.0) -> np.ndarray:
    """``S T S^{-1}``: ``T`` upper triangular with positive diagonal, ``cond(S) <= max_cond``."""
    diag = np.exp(gen.uniform(-1.0, 1.0, size=(m, l)))
    t = np.triu(ginibre(gen, (m,), l) * gen.uniform(0.0, 1.0, size=(m, 1, 1)), 1)
    idx = np.arange(l)
    t[:, idx, idx] = diag
    u = haar_unitary(gen, (m,), l)
    v = haar_unitary(gen, (m,), l)
    sv = np.exp(gen.uniform(0.0, np.log(max_cond), size=(m, l)))
    sv[:, 0] = 1.0
    s = (u * sv[:, None, :]) @ v
    return s @ t @ np.linalg.inv(s)


def triangular_sweep(l: int, samples: int, seed: int, tol: Tolerances = DEFAULT) -> SweepReport:
    """Running max of ``|1 - A| / |1 - |A||`` over gated random inputs."""
    best = 0.0
    witness = None
    gated_out = 0
    for k, m in _chunks(samples):
        gen = rng(seed, k)
        a = similar_triangular(gen, m, l)
        ok = _gate(a, tol)
        gated_out += int((~ok).sum())
        a = a[ok]
        lhs, rhs = triangular_sides(a, tol)
        keep = rhs >= tol.rhs_floor
        r = np.where(keep, lhs / np.where(keep, rhs, 1.0), 0.0)
        i = int(np.argmax(r))
        if r[i] > best:
            best = float(r[i])
            witness = _witness(A=a[i])
    finite = bool(np.isfinite(best))
    return SweepReport("triangular", samples, 0 if finite else 1, None, witness,
                       {"l": l, "seed": seed, "max_ratio": best, "gated_out": gated_out})


# -- Weyl facts -------------------------------------------------------------

@dataclass
class WeylResult:
    passed: bool
    bound_residual: float  # worst violation of s_1 >= |lambda_j| >= s_l (<= 0 when fine)
    product_residual: float  # relative gap between prod |lambda| and prod s


def weyl_residuals(a: np.ndarray, tol: Tolerances = DEFAULT):
    s = mc.svdvals(a, tol)
    lam = np.abs(mc.eigenvalues(a, tol))
    scale = np.maximum(s[..., :1], 1.0)
    upper = np.max(lam - s[..., :1], axis=-1) / scale[..., 0]
    lower = np.max(s[..., -1:] - lam, axis=-1) / scale[..., 0]
    bound = np.maximum(upper, lower)
    # products compared in log space to stay clear of under/overflow
    with np.errstate(divide="ignore"):
        ls = np.sum(np.log(s), axis=-1)
        ll = np.sum(np.log(lam), axis=-1)
    both_zero = np.isneginf(ls) & np.isneginf(ll)
    diff = np.where(both_zero, 0.0, ll - np.where(both_zero, 0.0, ls))
    prod = np.abs(np.expm1(diff))
    return bound, prod


def weyl_check(a, tol: Tolerances = DEFAULT, bound_tol: float = 1e-10,
               product_tol: float = 1e-9) -> WeylResult:
    a = mc.as_matrix(a, batched=False)
    bound, prod = weyl_residuals(a, tol)
    return WeylResult(bool(bound <= bound_tol and prod <= product_tol), float(bound), float(prod))


def weyl_sweep(samples: int, seed: int, max_l: int = 5, tol: Tolerances = DEFAULT,
               bound_tol: float = 1e-10, product_tol: float = 1e-9) -> SweepReport:
    """Split ``samples`` evenly over ``l = 1..max_l``."""
    failures = 0
    worst = np.inf
    witness = None
    per_l = {}
    sizes = [samples // max_l + (1 if i < samples % max_l else 0) for i in range(max_l)]
    for l, n_l in zip(range(1, max_l + 1), sizes):
        worst_l = (0.0, 0.0)
        for k, m in _chunks(n_l):
            a = ginibre(rng(seed, l, k), (m,), l)
            bound, prod = weyl_residuals(a, tol)
            bad = (bound > bound_tol) | (prod > product_tol)
            failures += int(bad.sum())
            margin = np.minimum(bound_tol - bound, (product_tol - prod) * bound_tol / product_tol)
            i = int(np.argmin(margin))
            if margin[i] < worst:
                worst = float(margin[i])
                witness = _witness(A=a[i])
            worst_l = (max(worst_l[0], float(bound.max())), max(worst_l[1], float(prod.max())))
        per_l[l] = {"samples": n_l, "max_bound_residual": worst_l[0], "max_product_residual": worst_l[1]}
    return SweepReport("weyl", samples, failures, worst, witness, {"seed": seed, "per_l": per_l})


def lemma2_sweep(l: int, samples: int, seed: int, tol: Tolerances = DEFAULT,
                 floor: float = -1e-10) -> SweepReport:
    """Count draws with ``sum(s - |lambda|) < floor`` (majorization says never)."""
    violations = 0
    worst = np.inf
    witness = None
    for k, m in _chunks(samples):
        gen = rng(seed, k)
        h = m // 2
        a = np.concatenate([near_unitary(gen, h, l), ginibre(gen, (m - h,), l)])
        lhs, _ = singval_eig_sides(a, tol)
        violations += int(np.sum(lhs < floor))
        i = int(np.argmin(lhs))
        if lhs[i] - floor < worst:
            worst = float(lhs[i] - floor)
            witness = _witness(A=a[i])
    return SweepReport("singval_lhs_nonnegative", samples, violations, worst, witness,
                       {"l": l, "seed": seed})
