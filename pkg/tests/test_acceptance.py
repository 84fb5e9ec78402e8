"""Acceptance criteria, each at its stated tolerance and sample size.

Every test reports one PASS/FAIL line through the ``criterion`` fixture; the
lines are printed together at the end of the run. Criterion 12 (whole-suite
wall clock) is timed in conftest.py.
"""

import time

import numpy as np
import pytest

from blockjacobi import counterexample as cex
from blockjacobi import inequalities as ineq
from blockjacobi import matcore as mc
from blockjacobi.asymptotics import (chain_increments, l1_sum, nevai_deviation, szego_probe,
                                     theorem1_probe, theorem2_bound)
from blockjacobi.ensembles import l1, nevai, random_chain, random_operator, rng
from blockjacobi.jacobi import (BlockJacobiOperator, Kind, apply_equivalence, canonicalize,
                                canonicalize_type2, max_block_distance, truncation_spectrum)
from blockjacobi.polynomials import covariance_check, eval_sequence

SEED = 20240601
JORDAN = np.array([[1, 1], [0, 1]], dtype=complex)


def test_c01_canonical_uniqueness(criterion):
    t0 = time.perf_counter()
    worst = {k: 0.0 for k in (1, 2, 3)}
    for trial in range(100):
        l = 2 + trial % 2
        gen = rng(SEED, 1, trial)
        j = random_operator(gen, l, 50)
        jp = apply_equivalence(j, random_chain(gen, l, 50))
        for k in (1, 2, 3):
            d = max_block_distance(canonicalize(j, k).canonical, canonicalize(jp, k).canonical)
            worst[k] = max(worst[k], d)
    dt = time.perf_counter() - t0
    ok = max(worst.values()) <= 1e-8 and dt <= 10.0
    criterion(1, ok, f"max blockwise disagreement type1/2/3 = "
                     f"{worst[1]:.1e}/{worst[2]:.1e}/{worst[3]:.1e} (tol 1e-8), {dt:.1f} s (<= 10 s)")


def test_c02_spectrum_invariance(criterion):
    worst = 0.0
    for trial in range(50):
        j = random_operator(rng(SEED, 2, trial), 2, 30)
        ref = truncation_spectrum(j)
        for k in (1, 2, 3):
            worst = max(worst, float(np.max(np.abs(truncation_spectrum(canonicalize(j, k).canonical) - ref))))
    criterion(2, worst <= 1e-9, f"max spectral difference {worst:.1e} (tol 1e-9), 50 instances N=30 l=2")


def test_c03_covariance(criterion):
    worst = 0.0
    for trial in range(100):
        gen = rng(SEED, 3, trial)
        l = 2 + trial % 2
        j = random_operator(gen, l, 30)
        chain = random_chain(gen, l, 30)
        for x in (0.3, 1.7, -2 + 0.5j):
            scale = float(np.max(mc.hs_norm(eval_sequence(j, x, 29).values)))
            worst = max(worst, covariance_check(j, chain, x, 29) / scale)
    criterion(3, worst <= 1e-9, f"max relative covariance residual {worst:.1e} (tol 1e-9), "
                                f"100 instances x 3 points, n_max=29")


def test_c04_polar_perturbation(criterion):
    t0 = time.perf_counter()
    parts = []
    total = 0
    for l in (2, 3, 4):
        rep = ineq.li_sweep(l, 100_000, seed=SEED + l)
        total += rep.violations
        parts.append(f"l={l}: {rep.violations} viol, max ratio {rep.extra['max_ratio']:.3f}")
    dt = time.perf_counter() - t0
    criterion(4, total == 0 and dt <= 60.0, "; ".join(parts) + f"; {dt:.1f} s (<= 60 s)")


def test_c05_weyl_facts(criterion):
    rep = ineq.weyl_sweep(100_000, seed=SEED, max_l=5)
    worst_prod = max(v["max_product_residual"] for v in rep.extra["per_l"].values())
    criterion(5, rep.violations == 0, f"{rep.violations} failures over 1e5 matrices l=1..5, "
                                      f"max product residual {worst_prod:.1e}")


def test_c06_singval_eig_gap(criterion):
    t = ineq.singval_eig_gap(JORDAN)
    # characteristic-polynomial oracle: a*a = [[1,1],[1,2]] has roots (3 +- sqrt 5)/2
    s = np.sqrt(np.sort(np.roots([1, -3, 1]))[::-1])
    lhs_o, rhs_o = np.sum(s - 1.0), np.sum((1 - s) ** 2)
    witness_ok = (abs(t.lhs - lhs_o) <= 1e-9 and abs(t.rhs - rhs_o) <= 1e-9
                  and abs(t.lhs - (np.sqrt(5) - 2)) <= 1e-9 and abs(t.rhs - 0.5279) <= 1e-4)
    c1 = ineq.estimate_c(2, 1_000_000, seed=SEED + 61)
    c2 = ineq.estimate_c(2, 1_000_000, seed=SEED + 62)
    spread = abs(c1.value - c2.value) / max(c1.value, c2.value)
    min_lhs = min(c1.min_lhs, c2.min_lhs)
    ok = witness_ok and spread <= 0.25 and min_lhs >= -1e-10 and not (c1.empty or c2.empty)
    criterion(6, ok, f"witness lhs {t.lhs:.10f} rhs {t.rhs:.10f}; c estimates {c1.value:.4f} / "
                     f"{c2.value:.4f} (spread {spread:.1%} <= 25%); min lhs {min_lhs:.1e} (>= -1e-10)")


def test_c07_triangular_ratio(criterion):
    parts = []
    ok = True
    for l in (2, 3):
        r = [ineq.triangular_sweep(l, 100_000, seed=SEED + 70 + 10 * l + s).extra["max_ratio"] for s in (0, 1)]
        spread = abs(r[0] - r[1]) / max(r)
        ok &= bool(np.all(np.isfinite(r))) and spread <= 0.25
        parts.append(f"l={l}: max ratio {r[0]:.4f} / {r[1]:.4f} (spread {spread:.1%})")
    d = np.exp(rng(SEED, 7).uniform(-2, 2, size=(1000, 3)))
    a = np.zeros((1000, 3, 3), dtype=complex)
    a[:, range(3), range(3)] = d
    lhs, rhs = ineq.triangular_sides(a)
    keep = rhs > 0
    diag_err = float(np.max(np.abs(lhs[keep] / rhs[keep] - 1)))
    ok &= diag_err <= 1e-12
    criterion(7, ok, "; ".join(parts) + f"; positive-diagonal |ratio - 1| {diag_err:.1e} (tol 1e-12)")


def test_c08_chain_summability(criterion):
    N = 2000
    viol = 0
    worst_tail = 0.0
    worst_margin = np.inf
    max_scaled = 0.0
    max_total = 0.0
    start = N - N // 10
    n = np.arange(1, N + 1)
    for seed in range(50):
        j = l1(rng(SEED, 8, seed), 2, N)
        total, summands = l1_sum(j)
        max_total = max(max_total, total)
        max_scaled = max(max_scaled, float(np.max(summands * n**2)))
        rep = theorem2_bound(j)
        for comp in (rep.type12, rep.type13):
            viol += comp.lhs > comp.rhs
            worst_margin = min(worst_margin, comp.margin)
            worst_tail = max(worst_tail, float(chain_increments(comp.chain).tail[start]))
    ok = viol == 0 and worst_tail <= 1e-2 and max_total <= 10
    criterion(8, ok, f"{viol} violations over 50 seeds x 2 comparisons (min margin {worst_margin:.2e}); "
                     f"max tail sum over last 10% {worst_tail:.1e} (<= 1e-2); "
                     f"max l1 total {max_total:.3f}, max n^2 summand {max_scaled:.3f}")


def test_c09_nevai_decay(criterion):
    worst = {k: 0.0 for k in Kind}
    for seed in range(20):
        rep = theorem1_probe(nevai(rng(SEED, 9, seed), 2, 2000, rate=0.5))
        for k, r in rep.ratios.items():
            worst[k] = max(worst[k], r)
    ok = all(v <= 0.1 for v in worst.values())
    criterion(9, ok, "worst last/first 10% max ratio " +
              ", ".join(f"{k.value} {v:.3f}" for k, v in worst.items()) + " (<= 0.1), 20 seeds N=2000")


def test_c10_nonconvergent_chain(criterion):
    t0 = time.perf_counter()
    spec = cex.ExampleSpec(levels=6)
    rep = cex.verify_nonconvergence(spec)
    s = canonicalize_type2(cex.build(spec)).chain.sigmas
    # oracle for phi via LAPACK's SVD
    m = spec.tau.conj().T @ cex.d_block(1) @ spec.tau @ cex.d_block(1)
    u, _, vh = np.linalg.svd(m)
    target = (u @ vh).conj().T
    pow_err = max(mc.hs_norm(s[2**jj - 1] - np.eye(2)) for jj in range(2, 7))
    three = [s[3 * 2 ** (jj - 1) - 1] for jj in range(2, 7)]
    spread = max(mc.hs_norm(x - three[0]) for x in three)
    target_err = max(mc.hs_norm(x - target) for x in three)
    dt = time.perf_counter() - t0
    bound = 0.5 * np.log(2) * (1 - 0.2)
    ok = (pow_err <= 1e-10 and spread <= 1e-10 and target_err <= 1e-10 and rep["sigma_gap"] > 0.01
          and rep["checks"]["nevai_chunks_decreasing"] and rep["l1_growth_second_half"] >= bound
          and rep["ok"] and dt <= 5.0)
    criterion(10, ok, f"sigma_2^j err {pow_err:.1e}, sigma_3*2^(j-1) spread {spread:.1e} / oracle err "
                      f"{target_err:.1e}, gap {rep['sigma_gap']:.4f} (> 0.01), l1 growth "
                      f"{rep['l1_growth_second_half']:.3f} (>= {bound:.3f}), {dt:.2f} s (<= 5 s)")


def test_c11_szego_free_limit(criterion):
    z = 0.5
    probe = szego_probe(BlockJacobiOperator.free(1, 100), z, 100)
    limit = 1 / (1 - z**2)
    err = float(np.max(np.abs(probe.values[30:, 0, 0] - limit)))
    criterion(11, err <= 1e-6, f"max |s_n - 4/3| for 30 <= n <= 100: {err:.1e} (tol 1e-6)")
