"""Command-line entry point: ``blockjacobi <subcommand> [flags]``.

Exit codes: 0 success, 1 a checked property failed (the report names the
witness), 2 bad input or usage.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import asymptotics as asy
from . import counterexample as cex
from . import ensembles as ens
from . import inequalities as ineq
from . import matcore as mc
from .errors import BlockJacobiError, NotEquivalent
from .jacobi import (BlockJacobiOperator, Kind, apply_equivalence, canonicalize, chain_between,
                     classify, truncation_spectrum)
from .polynomials import eval_sequence
from .tolerances import DEFAULT, Tolerances

SUBCOMMANDS = ("canonicalize", "chain", "spectrum", "poly", "diagnose", "theorem1", "theorem2",
               "verify", "counterexample", "szego", "generate")


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    seed: int
    tolerances: Tolerances
    options: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"subcommand": self.subcommand, "seed": self.seed,
                "tolerances": self.tolerances.as_dict(), "options": self.options}


def parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc


def _tol_pair(text: str) -> tuple[str, str]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    k, v = text.split("=", 1)
    return k.strip(), v.strip()


def _normalize_argv(argv: list[str]) -> list[str]:
    """Rewrite ``--tol.KEY=VALUE`` into ``--tol KEY=VALUE``."""
    out = []
    for a in argv:
        if a.startswith("--tol."):
            out += ["--tol", a[len("--tol."):]]
        else:
            out.append(a)
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=_tol_pair, action="append", default=[], metavar="KEY=VALUE",
                        help="tolerance override, also accepted as --tol.KEY=VALUE")
    common.add_argument("--out", type=Path, help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    p = argparse.ArgumentParser(prog="blockjacobi",
                                description="Canonical forms and asymptotics of block Jacobi matrices.",
                                epilog="exit codes: 0 ok, 1 a checked property failed, 2 bad input")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="subcommand", required=True)

    def add(name, help_, inp=True):
        sp = sub.add_parser(name, parents=[common], help=help_)
        if inp:
            sp.add_argument("--in", dest="inp", type=Path, required=True, help="operator JSON")
        return sp

    sp = add("canonicalize", "type-1/2/3 canonical form and its chain")
    sp.add_argument("--type", type=int, choices=(1, 2, 3), required=True)

    sp = add("chain", "recover the unitary chain between two equivalent operators")
    sp.add_argument("--other", type=Path, required=True, help="second operator JSON")

    add("spectrum", "eigenvalues of the finite truncation")

    sp = add("poly", "evaluate p_0(x) .. p_n(x)")
    sp.add_argument("--x", type=parse_complex, required=True)
    sp.add_argument("--n-max", type=int, required=True)

    add("diagnose", "per-index Nevai / summability / chain diagnostics")
    add("theorem1", "decay of |A_n - 1| for the three canonical forms")
    add("theorem2", "both sides of the chain-increment bounds")

    sp = add("verify", "randomized inequality checks", inp=False)
    sp.add_argument("inequality", choices=("li", "weyl", "lemma2", "estimate-c", "lemma3"))
    sp.add_argument("--l", type=int, default=2)
    sp.add_argument("--samples", type=int, default=10_000)

    sp = add("counterexample", "dyadic-chunk operator with a non-convergent chain", inp=False)
    sp.add_argument("--levels", type=int, default=6)
    sp.add_argument("--tau-angle", type=float, default=float(np.pi / 4))
    sp.add_argument("--tau-file", type=Path, help="2x2 unitary in matrix JSON (overrides the angle)")

    sp = add("szego", "z^n p_n(z + 1/z) along n")
    sp.add_argument("--z", type=parse_complex, required=True)
    sp.add_argument("--n-max", type=int, required=True)

    sp = add("generate", "write a random or named operator", inp=False)
    sp.add_argument("--ensemble", choices=("free", "nevai", "l1", "example"), required=True)
    sp.add_argument("--l", type=int, default=2)
    sp.add_argument("--n-blocks", type=int, default=100)
    sp.add_argument("--rate", type=float, default=None)
    sp.add_argument("--scale", type=float, default=None)
    sp.add_argument("--levels", type=int, default=6)
    return p


def _load_json(path: Path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _load_operator(path: Path, tol: Tolerances) -> BlockJacobiOperator:
    obj = _load_json(path)
    # accept our own reports: {"config", "result"} envelopes and counterexample output
    if isinstance(obj, dict) and "result" in obj and "config" in obj:
        obj = obj["result"]
    if isinstance(obj, dict) and "operator" in obj:
        obj = obj["operator"]
    try:
        return BlockJacobiOperator.from_json(obj, tol)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _cmatrices(stack) -> list:
    return [mc.matrix_to_json(m) for m in stack]


def _run(args, tol: Tolerances) -> tuple[object, bool]:
    """Return ``(result, ok)``; ``ok=False`` maps to exit code 1."""
    cmd = args.subcommand
    if cmd == "canonicalize":
        j = _load_operator(args.inp, tol)
        res = canonicalize(j, args.type, tol)
        kind = Kind(f"type{args.type}")
        ok = kind in classify(res.canonical, tol)
        out = res.to_json()
        out["identity_chain"] = bool(np.allclose(res.chain.sigmas, mc.identity(j.block_size), atol=1e-10))
        out["reconstruction_residual"] = float(
            max(np.max(mc.hs_norm(apply_equivalence(j, res.chain).a - res.canonical.a)), 0.0))
        if "flagged" in res.diagnostics:
            out["flagged"] = res.diagnostics["flagged"]
        return out, ok
    if cmd == "chain":
        j = _load_operator(args.inp, tol)
        jt = _load_operator(args.other, tol)
        try:
            chain = chain_between(j, jt, tol)
        except NotEquivalent as exc:
            return {"equivalent": False, "index": exc.index, "residual": exc.residual,
                    "message": str(exc)}, False
        return {"equivalent": True, "sigma": chain.to_json()}, True
    if cmd == "spectrum":
        j = _load_operator(args.inp, tol)
        return {"eigenvalues": [float(x) for x in truncation_spectrum(j)]}, True
    if cmd == "poly":
        j = _load_operator(args.inp, tol)
        seq = eval_sequence(j, args.x, args.n_max, tol)
        return {"x": [seq.point.real, seq.point.imag], "values": _cmatrices(seq.values),
                "overflow": seq.overflow}, True
    if cmd == "diagnose":
        return asy.diagnose(_load_operator(args.inp, tol), tol), True
    if cmd == "theorem1":
        return asy.theorem1_probe(_load_operator(args.inp, tol), tol).to_json(), True
    if cmd == "theorem2":
        rep = asy.theorem2_bound(_load_operator(args.inp, tol), tol)
        out = rep.to_json()
        return out, out["type1_type2"]["holds"] and out["type1_type3"]["holds"]
    if cmd == "verify":
        return _verify(args, tol)
    if cmd == "counterexample":
        if args.tau_file:
            tau = mc.matrix_from_json(_load_json(args.tau_file))
        else:
            tau = cex.rotation(args.tau_angle)
        try:
            spec = cex.ExampleSpec(args.levels, tau)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        report = cex.verify_nonconvergence(spec, tol)
        return {"operator": cex.build(spec).to_json(), "report": report}, report["ok"]
    if cmd == "szego":
        j = _load_operator(args.inp, tol)
        try:
            probe = asy.szego_probe(j, args.z, args.n_max, tol)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        return {"z": [probe.z.real, probe.z.imag], "values": _cmatrices(probe.values),
                "increments": [float(x) for x in probe.increments]}, True
    if cmd == "generate":
        return generate(args.ensemble, args, args.seed).to_json(), True
    raise InputError(f"unknown subcommand {cmd}")


def generate(name: str, params, seed: int) -> BlockJacobiOperator:
    """Named ensembles; ``params`` needs ``l``, ``n_blocks``, ``rate``, ``scale``, ``levels``."""
    gen = ens.rng(seed, 0)
    rate = getattr(params, "rate", None)
    scale = getattr(params, "scale", None)
    try:
        if name == "free":
            return BlockJacobiOperator.free(params.l, params.n_blocks)
        if name == "nevai":
            return ens.nevai(gen, params.l, params.n_blocks, rate=0.5 if rate is None else rate,
                             scale=1.0 if scale is None else scale)
        if name == "l1":
            return ens.l1(gen, params.l, params.n_blocks, rate=2.0 if rate is None else rate,
                          scale=0.25 if scale is None else scale)
        if name == "example":
            return cex.build(cex.ExampleSpec(params.levels))
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    raise InputError(f"unknown ensemble {name!r}")


def _verify(args, tol: Tolerances):
    which, l, n, seed = args.inequality, args.l, args.samples, args.seed
    if n < 1 or l < 1:
        raise InputError("--samples and --l must be positive")
    if which == "li":
        rep = ineq.li_sweep(l, n, seed, tol=tol)
    elif which == "weyl":
        rep = ineq.weyl_sweep(n, seed, max_l=l, tol=tol)
    elif which == "lemma2":
        rep = ineq.lemma2_sweep(l, n, seed, tol=tol)
    elif which == "lemma3":
        rep = ineq.triangular_sweep(l, n, seed, tol=tol)
    else:
        est = ineq.estimate_c(l, n, seed, tol=tol)
        out = {"inequality": "estimate_c", "samples": n, "violations": 0,
               "worst_margin": None, "l": l, "seed": seed, **est.to_json()}
        return out, True
    return rep.to_json(), rep.violations == 0


def _render(result, fmt: str, config: RunConfig) -> str:
    if fmt == "csv":
        if not isinstance(result, asy.DiagnosticsReport):
            raise InputError("--format csv is only available for diagnose")
        return result.to_csv()
    if isinstance(result, asy.DiagnosticsReport):
        result = result.to_json()
    return json.dumps({"config": config.to_json(), "result": result}, indent=2, sort_keys=True) + "\n"


def _plain(v):
    if isinstance(v, Path):
        return str(v)
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def run(argv: list[str] | None = None) -> int:
    argv = _normalize_argv(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on usage errors
    try:
        tol = DEFAULT.with_overrides(dict(args.tol))
    except (KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    options = {k: _plain(v) for k, v in sorted(vars(args).items())
               if k not in ("subcommand", "seed", "tol", "out", "format")}
    options["format"] = args.format
    config = RunConfig(args.subcommand, args.seed, tol, options)
    try:
        result, ok = _run(args, tol)
        text = _render(result, args.format, config)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BlockJacobiError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    if not ok:
        print(f"{args.subcommand}: check failed", file=sys.stderr)
    return 0 if ok else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
