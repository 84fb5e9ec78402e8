"""Diagnostics for Nevai-class and summable Jacobi parameters.

Limits cannot be certified on a finite truncation, so everything here is
reported as monitored quantities: per-index deviations, partial sums, tail
sums and last-window maxima. Norm convention: unmarked norms are operator
norms; ``_hs`` quantities are Hilbert-Schmidt.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import matcore as mc
from .jacobi import (BlockJacobiOperator, Kind, UnitaryChain, canonicalize_type1,
                     canonicalize_type2, canonicalize_type3)
from .polynomials import eval_sequence
from .tolerances import DEFAULT, Tolerances


def nevai_deviation(j: BlockJacobiOperator, tol: Tolerances = DEFAULT):
    """Per-block ``(|B_n|, |1 - A_n A_n*|)`` as two arrays.

    Both norms are unitarily invariant, so the result is the same for every
    operator in the equivalence class.
    """
    l = j.block_size
    b = np.asarray(mc.op_norm(j.b, tol)).reshape(-1)
    aa = np.asarray(mc.op_norm(mc.identity(l) - j.a @ mc.adjoint(j.a), tol)).reshape(-1)
    return b, aa


def l1_sum(j: BlockJacobiOperator, tol: Tolerances = DEFAULT):
    """Total and per-block summands ``|1 - A_n A_n*| + |B_n|``."""
    b, aa = nevai_deviation(j, tol)
    summands = aa + b
    return float(summands.sum()), summands


class ChainIncrements(NamedTuple):
    increments: np.ndarray  # |sigma_n - sigma_{n+1}|_HS, n = 1..N
    tail: np.ndarray  # tail[m-1] = sum_{n >= m} increments
    last_window_max: float
    window: int


def chain_increments(chain: UnitaryChain, window: int | None = None) -> ChainIncrements:
    s = chain.sigmas
    inc = np.asarray(mc.hs_norm(s[1:] - s[:-1])).reshape(-1)
    tail = np.cumsum(inc[::-1])[::-1]
    if window is None:
        window = max(1, len(inc) // 10)
    return ChainIncrements(inc, tail, float(inc[-window:].max()), window)


def _dev_from_identity(a: np.ndarray, tol: Tolerances) -> np.ndarray:
    return np.asarray(mc.op_norm(a - mc.identity(a.shape[-1]), tol)).reshape(-1)


def decay_ratio(seq: np.ndarray, fraction: float = 0.1) -> float:
    """Max over the last ``fraction`` of indices divided by max over the first."""
    w = max(1, int(round(len(seq) * fraction)))
    head = float(np.max(seq[:w]))
    tail = float(np.max(seq[-w:]))
    if head == 0.0:
        return 0.0 if tail == 0.0 else float("inf")
    return tail / head


@dataclass
class Theorem1Report:
    deviations: dict[Kind, np.ndarray]  # |At_n - 1| per canonical type
    # |sigma_n* sigma_{n+1} - 1| along the chain from the type-1 form to type 2 and 3
    factored: dict[Kind, np.ndarray]
    ratios: dict[Kind, float]

    def to_json(self) -> dict:
        return {
            "deviations": {k.value: v.tolist() for k, v in self.deviations.items()},
            "factored": {k.value: v.tolist() for k, v in self.factored.items()},
            "decay_ratio": {k.value: v for k, v in self.ratios.items()},
        }


def _factored(chain: UnitaryChain, tol: Tolerances) -> np.ndarray:
    s = chain.sigmas
    return _dev_from_identity(mc.adjoint(s[:-1]) @ s[1:], tol)


def theorem1_probe(j: BlockJacobiOperator, tol: Tolerances = DEFAULT,
                   fraction: float = 0.1) -> Theorem1Report:
    """Canonicalize to all three types and monitor ``|At_n - 1|``."""
    c1 = canonicalize_type1(j, tol)
    forms = {Kind.TYPE1: c1, Kind.TYPE2: canonicalize_type2(j, tol), Kind.TYPE3: canonicalize_type3(j, tol)}
    dev = {k: _dev_from_identity(r.canonical.a, tol) for k, r in forms.items()}
    hat = c1.canonical
    factored = {
        Kind.TYPE2: _factored(canonicalize_type2(hat, tol).chain, tol),
        Kind.TYPE3: _factored(canonicalize_type3(hat, tol).chain, tol),
    }
    return Theorem1Report(dev, factored, {k: decay_ratio(v, fraction) for k, v in dev.items()})


class Comparison(NamedTuple):
    lhs: float
    rhs: float
    # intermediate links of the bound, for reporting
    steps: dict
    chain: UnitaryChain

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


@dataclass
class Theorem2Report:
    type12: Comparison
    type13: Comparison

    def to_json(self) -> dict:
        def one(c: Comparison) -> dict:
            return {"lhs": c.lhs, "rhs": c.rhs, "margin": c.margin, "holds": bool(c.lhs <= c.rhs),
                    **{k: v for k, v in c.steps.items()}}
        return {"type1_type2": one(self.type12), "type1_type3": one(self.type13)}


def theorem2_bound(j: BlockJacobiOperator, tol: Tolerances = DEFAULT) -> Theorem2Report:
    """Both sides of the summability bounds on the sigma-chain increments.

    Type 1 vs 2 (``Ah`` = type-1 blocks)::

        sum |s_n - s_{n+1}|_HS
          <= (max |Ah_n|_HS + 1) * max |(1 + Ah_n)^{-1}|_HS * sum_{n>=1} |1 - Ah_{n+1}^2|_HS

    Type 1 vs 3 (``A`` = type-3 blocks)::

        sum |s_n - s_{n+1}|_HS <= sum |1 - A_n|_HS + sum |Ah_n - 1|_HS

    The sups are maxima over the truncation. ``steps`` also records the
    sum of the per-step polar-factor bounds (``li_sum``), which sits between
    the two sides of the first inequality.
    """
    l = j.block_size
    eye = mc.identity(l)
    hat = canonicalize_type1(j, tol).canonical
    ah = hat.a

    c2 = canonicalize_type2(hat, tol).chain
    inc2 = chain_increments(c2).increments
    nxt = ah[1:]
    li_terms = np.sqrt(np.asarray(mc.hs_norm(eye - np.linalg.inv(nxt))) ** 2
                       + np.asarray(mc.hs_norm(eye - nxt)) ** 2) if len(nxt) else np.zeros(0)
    sup_a = float(np.max(mc.hs_norm(ah)))
    sup_res = float(np.max(mc.hs_norm(np.linalg.inv(eye + ah))))
    sq_sum = float(np.sum(mc.hs_norm(eye - nxt @ nxt))) if len(nxt) else 0.0
    rhs12 = (sup_a + 1.0) * sup_res * sq_sum
    type12 = Comparison(float(inc2.sum()), rhs12,
                        {"li_sum": float(np.sum(li_terms)), "sup_hs_a": sup_a,
                         "sup_hs_resolvent": sup_res, "sum_hs_1_minus_a2": sq_sum}, c2)

    r3 = canonicalize_type3(hat, tol)
    c3 = r3.chain
    inc3 = chain_increments(c3).increments
    tri_dev = float(np.sum(mc.hs_norm(eye - r3.canonical.a)))
    hat_dev = float(np.sum(mc.hs_norm(ah - eye)))
    type13 = Comparison(float(inc3.sum()), tri_dev + hat_dev,
                        {"sum_hs_1_minus_a3": tri_dev, "sum_hs_ahat_minus_1": hat_dev}, c3)
    return Theorem2Report(type12, type13)


class SzegoProbe(NamedTuple):
    z: complex
    values: np.ndarray  # s_n = z^n p_n(z + 1/z)
    increments: np.ndarray  # |s_{n+1} - s_n|_HS


def szego_probe(j: BlockJacobiOperator, z: complex, n_max: int,
                tol: Tolerances = DEFAULT) -> SzegoProbe:
    if not 0 < abs(z) < 1:
        raise ValueError("szego_probe needs 0 < |z| < 1")
    p = eval_sequence(j, z + 1.0 / z, n_max, tol).values
    s = (z ** np.arange(n_max + 1))[:, None, None] * p
    return SzegoProbe(complex(z), s, np.asarray(mc.hs_norm(s[1:] - s[:-1])).reshape(-1))


REPORT_COLUMNS = ("n", "nevai_b", "nevai_a", "type1_dev", "type2_dev", "type3_dev",
                  "sigma_inc_12", "sigma_inc_13", "l1_partial", "cauchy_tail_12", "cauchy_tail_13")


@dataclass
class DiagnosticsReport:
    """Per-index diagnostics plus summary scalars.

    ``sigma_inc_12`` is ``|s_n - s_{n+1}|_HS`` for the chain taking the
    type-1 form to the type-2 form (``_13`` likewise for type 3).
    """

    columns: dict[str, np.ndarray]
    summary: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {k: [int(x) if k == "n" else float(x) for x in self.columns[k]] for k in REPORT_COLUMNS}
        out["summary"] = self.summary
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for i in range(len(self.columns["n"])):
            w.writerow([int(self.columns["n"][i])] + [repr(float(self.columns[k][i]))
                                                      for k in REPORT_COLUMNS[1:]])
        return buf.getvalue()


def diagnose(j: BlockJacobiOperator, tol: Tolerances = DEFAULT) -> DiagnosticsReport:
    nb, na = nevai_deviation(j, tol)
    t1 = theorem1_probe(j, tol)
    t2 = theorem2_bound(j, tol)
    i12 = chain_increments(t2.type12.chain)
    i13 = chain_increments(t2.type13.chain)
    cols = {
        "n": np.arange(1, j.length + 1),
        "nevai_b": nb,
        "nevai_a": na,
        "type1_dev": t1.deviations[Kind.TYPE1],
        "type2_dev": t1.deviations[Kind.TYPE2],
        "type3_dev": t1.deviations[Kind.TYPE3],
        "sigma_inc_12": i12.increments,
        "sigma_inc_13": i13.increments,
        "l1_partial": np.cumsum(na + nb),
        "cauchy_tail_12": i12.tail,
        "cauchy_tail_13": i13.tail,
    }
    summary = {
        "l1_total": float(cols["l1_partial"][-1]),
        "last_window_max_inc_12": i12.last_window_max,
        "last_window_max_inc_13": i13.last_window_max,
        "window": i12.window,
        "decay_ratio": {k.value: v for k, v in t1.ratios.items()},
        "theorem2": t2.to_json(),
    }
    return DiagnosticsReport(cols, summary)
