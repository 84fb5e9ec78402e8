"""Numerical tolerances, overridable per call or from the command line."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """Default thresholds.

    Relative tolerances are scaled at the point of use: ``unitary_tol`` by the
    block size, ``pos_tol`` and ``singular_tol`` by the operator norm,
    ``herm_tol`` and ``tri_tol`` by the norm of the block being tested.
    """

    unitary_tol: float = 1e-12
    pos_tol: float = 1e-10
    singular_tol: float = 1e-12
    svd_tol: float = 1e-12
    svd_gram_tol: float = 1e-14
    svd_max_sweeps: int = 60
    herm_tol: float = 1e-10
    tri_tol: float = 1e-10
    recon_tol: float = 1e-9
    eig_real_tol: float = 1e-9
    rhs_floor: float = 1e-14
    overflow_norm: float = 1e12

    def replace(self, **overrides) -> "Tolerances":
        return dataclasses.replace(self, **overrides)

    def with_overrides(self, pairs: dict[str, str]) -> "Tolerances":
        """Apply ``KEY=VALUE`` string overrides, coercing to each field's type."""
        kinds = {f.name: f.type for f in dataclasses.fields(self)}
        parsed = {}
        for key, value in pairs.items():
            if key not in kinds:
                raise KeyError(f"unknown tolerance {key!r}; known: {sorted(kinds)}")
            parsed[key] = int(value) if kinds[key] in (int, "int") else float(value)
        return dataclasses.replace(self, **parsed)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


DEFAULT = Tolerances()
