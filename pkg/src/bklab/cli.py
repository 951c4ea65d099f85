"""Command-line front end.

Subcommands: gen-model, gen-op, norm, modulus, zero-two, verify.
Exit codes: 0 success, 1 runtime-detected violation or I/O failure,
2 invalid arguments or corrupt input files.  Identical arguments and
input files produce byte-identical output files.  The BK_THREADS
environment variable caps fiber-loop parallelism (0 or unset = auto).
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import norms, operators, storage, verify, zerotwo
from .errors import (
    InfeasibleScalingError,
    InvalidPError,
    RuntimeViolation,
    UsageError,
)
from .lattice import BaseSpace, BooleanAtoms, Model, VectorMeasure
from .operators import GEN_MODES, FiberedOperator


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="deterministic run seed")
    parser.add_argument("--quiet", action="store_true", help="suppress informational output")


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="bklab", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-model", help="generate a model file (base atoms + vector measure)")
    p.add_argument("--omega", type=int, required=True, metavar="K", help="number of base atoms")
    p.add_argument("--atoms", type=int, required=True, metavar="N", help="number of Boolean atoms")
    p.add_argument("--normalize", action="store_true", help="scale each measure row to unit mass")
    p.add_argument("-o", "--output", required=True)
    _common(p)

    p = sub.add_parser("gen-op", help="generate a verified contraction over a model")
    p.add_argument("--model", required=True)
    p.add_argument("--mode", required=True, choices=GEN_MODES)
    p.add_argument("-o", "--output", required=True)
    _common(p)

    p = sub.add_parser("norm", help="print the vector-valued operator norm, one fiber per line")
    p.add_argument("--op", required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--method", choices=("exact", "boyd", "oracle"), default=None)
    _common(p)

    p = sub.add_parser("modulus", help="write the operator modulus as an operator file")
    p.add_argument("--op", required=True)
    p.add_argument("-o", "--output", required=True)
    _common(p)

    p = sub.add_parser("zero-two", help="trace d_n = || |T^(n+1) - T^n| || and classify fibers")
    p.add_argument("--op", required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("-o", "--output", required=True, help="trace CSV path")
    p.add_argument("--verdicts", default=None, help="optional verdict JSON path")
    p.add_argument("--zero-tol", type=float, default=1e-8)
    p.add_argument("--two-tol", type=float, default=1e-9)
    _common(p)

    p = sub.add_parser("verify", help="run the law suites")
    p.add_argument("--suite", default="all",
                   choices=("all",) + verify.SUITE_NAMES)
    p.add_argument("--counterexample", default="bk-counterexample.json",
                   help="where to write the first failing instance")
    _common(p)
    return top


def _cmd_gen_model(args) -> int:
    if args.omega < 1 or args.atoms < 1:
        raise UsageError("--omega and --atoms must be >= 1")
    rng = np.random.default_rng(args.seed)
    weights = rng.uniform(0.5, 1.5, args.omega)
    measure = rng.uniform(0.2, 2.0, (args.omega, args.atoms))
    if args.normalize:
        measure = measure / measure.sum(axis=1, keepdims=True)
    model = Model(BaseSpace(weights), BooleanAtoms(args.atoms), VectorMeasure(measure))
    storage.store_model(model, args.output)
    if not args.quiet:
        print(f"wrote model K={args.omega} N={args.atoms} to {args.output}")
    return 0


def _cmd_gen_op(args) -> int:
    model = storage.load_model(args.model)
    T = None
    last_error: InfeasibleScalingError | None = None
    for attempt in range(100):
        try:
            T = operators.gen_contraction(model.base, model.atoms, model.measure,
                                          args.mode, seed=args.seed + attempt)
            break
        except InfeasibleScalingError as exc:
            last_error = exc
    if T is None:
        print(f"bklab: generation infeasible after 100 resamples: {last_error}", file=sys.stderr)
        return 1

    majorant_ref = None
    if args.mode == "signed":
        out = Path(args.output)
        sidecar = out.with_name(out.stem + ".majorant.json")
        storage.store_operator(operators.modulus_direct(T), model, sidecar)
        majorant_ref = sidecar.name
    storage.store_operator(T, model, args.output, majorant_ref=majorant_ref)
    if not args.quiet:
        flags = f"positive={T.positive} sub_unital={T.sub_unital}"
        print(f"wrote {args.mode} operator ({flags}) to {args.output}")
        if majorant_ref:
            print(f"wrote majorant sidecar to {majorant_ref}")
    return 0


def _cmd_norm(args) -> int:
    T, model = storage.load_operator(args.op)
    method = args.method or "auto"
    if method == "exact" and args.p not in (1.0, 2.0, math.inf):
        raise InvalidPError(f"--method exact needs p in {{1, 2, inf}}, got {args.p}")
    if method == "boyd" and not (1.0 < args.p < math.inf):
        raise InvalidPError(f"--method boyd needs 1 < p < inf, got {args.p}")
    values = norms.l0_opnorm(T, model.measure, args.p, method=method, seed=args.seed)
    for v in values:
        print(f"{v:.17g}")
    return 0


def _cmd_modulus(args) -> int:
    T, model = storage.load_operator(args.op)
    report = operators.modulus_net(T)
    direct = operators.modulus_direct(T)
    if not np.array_equal(report.modulus.fibers, direct.fibers):
        print("bklab: net and direct modulus disagree; refusing to write", file=sys.stderr)
        return 1
    storage.store_operator(report.modulus, model, args.output)
    if not args.quiet:
        print(f"wrote modulus (net stabilized after {report.steps_to_stabilize} splits) "
              f"to {args.output}")
    return 0


def _cmd_zero_two(args) -> int:
    T, model = storage.load_operator(args.op)
    trace = zerotwo.run_dichotomy(T, model.measure, args.p, args.n_max,
                                  two_tol=args.two_tol)
    storage.write_trace_csv(trace, args.output)
    if args.verdicts:
        verdicts = zerotwo.classify(trace, zero_tol=args.zero_tol, two_tol=args.two_tol)
        storage.write_verdicts(verdicts, args.verdicts)
    if not args.quiet:
        m = trace.hypothesis_m
        print(f"wrote {trace.steps_computed} steps to {args.output}; "
              f"hypothesis index: {'none' if m is None else m}")
    return 0


def _cmd_verify(args) -> int:
    names = verify.SUITE_NAMES if args.suite == "all" else (args.suite,)
    printer = (lambda *_: None) if args.quiet else print
    rc = verify.run_suites(names, args.seed, printer=printer,
                           counterexample_path=args.counterexample)
    if rc != 0 and args.quiet:
        print(f"verify failed; counterexample at {args.counterexample}", file=sys.stderr)
    return rc


_COMMANDS = {
    "gen-model": _cmd_gen_model,
    "gen-op": _cmd_gen_op,
    "norm": _cmd_norm,
    "modulus": _cmd_modulus,
    "zero-two": _cmd_zero_two,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"bklab: invalid input: {exc}", file=sys.stderr)
        return 2
    except RuntimeViolation as exc:
        print(f"bklab: violation detected: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"bklab: I/O failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
