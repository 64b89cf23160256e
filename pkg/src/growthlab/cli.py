"""growth-lab command line.

Exit codes: 0 ok, 1 a checked invariant failed, 2 bad input, 3 resource cap
hit, 4 profile too short for the requested fit.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .balls import MEMORY_CAP, BallProfile, ResourceCapExceeded, ball_profile
from .catalog import CATALOG, lookup
from .groups import AbelianQuotient, GeneratingSet, UnsupportedOperation, group_from_json
from .growth import ProfileTooShort, fit_growth
from .progression import (Progression, check_upper_triangular, enumerate_progression, fraction_str,
                          inj_mod_center, injectivity_radius, progression_power, zeta_dilation_constant,
                          zeta_weights)
from .suites import SUITES, run_suite
from .topology import CPath, FiniteGraph, cpath_equivalent, pk_h1_rank, relation_lattice
from .witness import CORRUPTIONS, FineScaleWitness, corrupt, cyclic_strip_witness, heisenberg_central_witness, \
    verify_witness

EXIT_OK, EXIT_FAILED, EXIT_PARSE, EXIT_CAP, EXIT_SHORT = 0, 1, 2, 3, 4

BUILTIN_WITNESSES = {"cyclic-strip": cyclic_strip_witness, "heisenberg-central": heisenberg_central_witness}


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _read_json(path: str) -> dict:
    return json.loads(_read_text(path))


def load_group_spec(spec: str):
    """A catalog name, or a JSON file holding {"group": ..., "generators": ...}."""
    if os.path.exists(spec) or spec == "-":
        doc = _read_json(spec)
        group = group_from_json(doc["group"])
        gens = doc.get("generators")
        s = GeneratingSet.from_json(group, gens) if gens is not None else \
            GeneratingSet.build(group, group.standard_generators())
        return group, s
    entry = lookup(spec)
    return entry.group, entry.generators


def load_graph(spec: str) -> FiniteGraph:
    """``cycle:n``, ``grid:r,c``, ``complete:n``, a JSON graph file, or a finite group spec (Cayley graph)."""
    key, _, arg = spec.partition(":")
    if key == "cycle":
        return FiniteGraph.cycle(int(arg))
    if key == "complete":
        return FiniteGraph.complete(int(arg))
    if key == "grid":
        rows, cols = (int(x) for x in arg.split(","))
        return FiniteGraph.grid(rows, cols)
    if os.path.exists(spec):
        doc = _read_json(spec)
        if "adjacency" in doc:
            return FiniteGraph.from_json(doc)
    group, s = load_group_spec(spec)
    if not group.is_finite():
        raise ValueError("Cayley graphs need a finite group")
    return FiniteGraph.cayley(group, list(s.elements))


def _emit(payload) -> None:
    if isinstance(payload, str):
        sys.stdout.write(payload if payload.endswith("\n") else payload + "\n")
    else:
        sys.stdout.write(json.dumps(payload, indent=2, ensure_ascii=False) + "\n")


# ---------------------------------------------------------------------------
# commands


def cmd_profile(args) -> int:
    group, s = load_group_spec(args.spec)
    prof = ball_profile(group, s, args.radius, args.cap)
    _emit(prof.to_csv() if args.out == "csv" else prof.to_json())
    if prof.truncated:
        print(f"profile truncated at radius {len(prof.beta) - 1} by the memory cap", file=sys.stderr)
        return EXIT_CAP
    return EXIT_OK


def cmd_fit(args) -> int:
    prof = BallProfile.parse(_read_text(args.profile))
    fit = fit_growth(prof, args.anchor)
    if args.out == "csv":
        lines = ["n,beta,fit"] + [f"{n},{b},{f:.6g}" for n, b, f in fit.comparison_rows(prof)]
        _emit("\n".join(lines))
    else:
        _emit(fit.to_json())
    return EXIT_OK


def cmd_prog(args) -> int:
    p = Progression.from_json(_read_json(args.progression))
    if args.action == "enumerate":
        n = args.power
        elems = enumerate_progression(p, args.cap) if n == 1 else progression_power(p, n, args.cap)
        doc = {"power": n, "size": len(elems)}
        if args.list:
            doc["elements"] = [list(x) for x in sorted(elems)]
        _emit(doc)
        return EXIT_OK
    report = check_upper_triangular(p.group, p.generators, p.lengths, c_max=args.c_max)
    doc = {"upper_triangular": report.ok, "constant": report.constant,
           "failure": None if report.failure is None else [str(x) for x in report.failure]}
    if args.action == "zeta" and report.ok:
        zeta = zeta_weights(report, p.dim).weights
        doc["zeta"] = list(zeta)
        doc["dilation_constant"] = fraction_str(zeta_dilation_constant(p, zeta, args.power, args.cap))
    _emit(doc)
    return EXIT_OK if report.ok else EXIT_FAILED


def _radius_cmd(fn, label):
    def run(args) -> int:
        p = Progression.from_json(_read_json(args.progression))
        rad = fn(p, args.radius, args.cap)
        _emit({label: rad.to_json(), "display": str(rad)})
        return EXIT_OK
    return run


def cmd_lssc(args) -> int:
    g = load_graph(args.graph)
    if args.action == "h1":
        ks = range(args.k, args.k + 1) if args.k_max is None else range(args.k, args.k_max + 1)
        rows = [{"k": k, **pk_h1_rank(g, k, args.cap).to_json()} for k in ks]
        _emit(rows if len(rows) > 1 else rows[0])
        return EXIT_OK
    if not args.path or len(args.path) != 2:
        raise ValueError("homotopy needs two --path arguments")
    p, q = (CPath(g, args.step, tuple(int(v) for v in text.split(","))) for text in args.path)
    verdict = cpath_equivalent(p, q, args.step, args.length, budget=args.budget)
    _emit(verdict.to_json())
    return EXIT_OK


def cmd_relscales(args) -> int:
    group, s = load_group_spec(args.spec)
    if not isinstance(group, AbelianQuotient):
        raise UnsupportedOperation("relation scales are decided for abelian groups only")
    gens = [g for g in s.elements if g != group.identity()]
    # one generator per inverse pair
    picked = []
    for g in gens:
        if group.inverse(g) not in picked:
            picked.append(g)
    lattice = relation_lattice(group, picked, args.n_max)
    doc = lattice.to_json()
    _emit({"new_relation_scales": doc["new_relation_scales"], "kernel": doc["kernel"],
           "generators": [list(g) for g in picked]} if not args.full else doc)
    return EXIT_OK


def cmd_witness(args) -> int:
    if args.source in BUILTIN_WITNESSES:
        w = BUILTIN_WITNESSES[args.source]()
    else:
        w = FineScaleWitness.from_json(_read_json(args.source))
    if args.corrupt:
        w = corrupt(w, args.corrupt)
    if args.dump:
        _emit(w.to_json())
        return EXIT_OK
    report = verify_witness(w, max_radius=args.radius or 256, cap=args.cap)
    _emit(report.to_json())
    return EXIT_OK if report.ok else EXIT_FAILED


def cmd_verify(args) -> int:
    report = run_suite(args.suite, args.seed)
    if args.out == "json":
        _emit(report.to_json())
    else:
        for c in report.checks:
            print(f"{'PASS' if c.ok else 'FAIL'}  {c.name}" + (f"  [{c.detail}]" if c.detail else ""))
        print(f"{report.suite}: {len(report.checks) - len(report.failures)}/{len(report.checks)} passed")
    return EXIT_OK if report.ok else EXIT_FAILED


def cmd_catalog(args) -> int:
    if not args.name:
        _emit({"names": list(CATALOG)})
        return EXIT_OK
    _emit(lookup(args.name).to_json())
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cap", type=int, default=MEMORY_CAP, help="memory cap on enumerated sets")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized suites")
    common.add_argument("--out", choices=("json", "csv"), default="json", help="output format")

    parser = argparse.ArgumentParser(prog="growth-lab", description="Exact growth computations in concrete groups")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", parents=[common], help="ball sizes |S^n| by breadth-first search")
    p.add_argument("spec", help="catalog name or JSON group spec file")
    p.add_argument("--radius", type=int, required=True)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("fit", parents=[common], help="piecewise-monomial fit of a profile")
    p.add_argument("profile", help="profile file (CSV or JSON, '-' for stdin)")
    p.add_argument("--anchor", type=int, default=1)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("prog", parents=[common], help="progression enumeration and form checks")
    p.add_argument("action", choices=("enumerate", "check", "zeta"))
    p.add_argument("progression", help="progression JSON file")
    p.add_argument("--power", type=int, default=1)
    p.add_argument("--c-max", type=int, default=64)
    p.add_argument("--list", action="store_true", help="also print the elements")
    p.set_defaults(func=cmd_prog)

    for name, fn, label in (("inj", injectivity_radius, "inj"), ("injz", inj_mod_center, "inj_z")):
        p = sub.add_parser(name, parents=[common], help=f"{label} radius of a progression with projection")
        p.add_argument("progression")
        p.add_argument("--radius", type=int, default=16, help="largest power searched")
        p.set_defaults(func=_radius_cmd(fn, label))

    p = sub.add_parser("lssc", parents=[common], help="coarse simple connectedness of finite graphs")
    p.add_argument("action", choices=("h1", "homotopy"))
    p.add_argument("graph", help="cycle:n, grid:r,c, complete:n, JSON graph or finite group spec")
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--k-max", type=int)
    p.add_argument("--path", action="append", help="comma-separated vertices (give twice)")
    p.add_argument("--step", type=int, default=1)
    p.add_argument("--length", type=int, default=4)
    p.add_argument("--budget", type=int, default=20_000)
    p.set_defaults(func=cmd_lssc)

    p = sub.add_parser("relscales", parents=[common], help="new relation scales of an abelian group")
    p.add_argument("spec")
    p.add_argument("--n-max", type=int, default=12)
    p.add_argument("--full", action="store_true")
    p.set_defaults(func=cmd_relscales)

    p = sub.add_parser("witness", parents=[common], help="check a fine-scale witness")
    p.add_argument("source", help=f"{' | '.join(BUILTIN_WITNESSES)} or a witness JSON file")
    p.add_argument("--radius", type=int, help="largest sampled radius (default 256)")
    p.add_argument("--corrupt", choices=sorted(CORRUPTIONS))
    p.add_argument("--dump", action="store_true", help="print the witness JSON instead of checking it")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("verify", parents=[common], help="run a registered check suite")
    p.add_argument("suite", choices=sorted(SUITES))
    p.set_defaults(func=cmd_verify, out="text")

    p = sub.add_parser("catalog", parents=[common], help="list catalog names or show one entry")
    p.add_argument("name", nargs="?")
    p.set_defaults(func=cmd_catalog)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ProfileTooShort as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SHORT
    except ResourceCapExceeded as exc:
        print(f"error: resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ValueError, KeyError, OSError, UnsupportedOperation, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    raise SystemExit(main())
