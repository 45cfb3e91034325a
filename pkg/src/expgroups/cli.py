"""Command-line experiment harness.

Subcommands mirror the experiment drivers: gen-additive, gen-ideal,
decide-variety, subproduct-bound.  Each loads an algebra spec, runs
seeded trials, and writes a JSON report (stdout or --out).  Exit code 0
means the empirical rate met the bound threshold, 1 means it did not,
2 means the invocation or a spec file was invalid.  Reports are
byte-identical for identical (command, seed); timing goes to stderr.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from .blackbox import SizeOverflowError
from .experiments import (
    decide_variety_experiment,
    gen_additive_experiment,
    gen_ideal_experiment,
    render_report,
    subproduct_experiment,
)
from .randgen import BadConstantError, GenParams
from .specfiles import SpecError, load_algebra_spec, load_identity_basis
from .varieties import NonNilpotentBasisError

USAGE_ERROR = 2


def _add_common(p: argparse.ArgumentParser, with_c: bool = True):
    p.add_argument("--spec", required=True, help="algebra spec JSON file")
    if with_c:
        p.add_argument("--c", type=float, default=2.0,
                       help="failure constant c > 1 (default 2.0)")
        p.add_argument("--k", type=int, default=None,
                       help="override the derived subsum multiplier k")
        p.add_argument("--n", type=int, default=None,
                       help="override the algorithm input n")
    p.add_argument("--salt-bits", type=int, default=None,
                   help="override the spec's salt bits")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="report path (default stdout)")
    p.add_argument("--threads", type=int, default=1,
                   help="worker processes for trial chunks")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="expgroups",
        description="Monte Carlo harness for black-box expanded-group algorithms")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("gen-additive",
                        help="additive-generator algorithm vs the n/c^n bound")
    _add_common(p)

    p = subs.add_parser("gen-ideal",
                        help="ideal-generator algorithm vs the 2n/c^n bound")
    _add_common(p)
    p.add_argument("--t", required=True,
                   help="comma-separated element indices generating the ideal, "
                        "or 'none' for the empty tuple")
    p.add_argument("--reduce", action="store_true",
                   help="reduce the output system to k*n subsums and re-verify")

    p = subs.add_parser("decide-variety",
                        help="variety membership vs the n/c^n bound")
    _add_common(p)
    p.add_argument("--basis", required=True, help="identity basis JSON file")

    p = subs.add_parser("subproduct-bound",
                        help="random-subsum lemma at k*l subsums, l = max chain length")
    _add_common(p, with_c=False)
    p.add_argument("--k", type=int, required=True, help="subsum multiplier k >= 3")

    return parser


def _parse_t(text: str, size: int) -> tuple[int, ...]:
    if text.strip().lower() in ("none", ""):
        return ()
    try:
        vals = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise SpecError("--t", f"expected comma-separated integers, got {text!r}")
    for v in vals:
        if not 0 <= v < size:
            raise SpecError("--t", f"element index {v} outside [0, {size})")
    return vals


def _run(args) -> tuple[dict, dict]:
    spec = load_algebra_spec(args.spec)
    salt_bits = spec.salt_bits if args.salt_bits is None else args.salt_bits
    if salt_bits < 0:
        raise SpecError("--salt-bits", "must be >= 0")
    if args.trials < 1:
        raise SpecError("--trials", "must be >= 1")
    echo = {
        "subcommand": args.command,
        "spec": Path(args.spec).name,
        "salt_bits": salt_bits,
        "trials": args.trials,
        "seed": args.seed,
    }
    if args.command == "subproduct-bound":
        if args.k < 3:
            raise SpecError("--k", "must be >= 3")
        echo["k"] = args.k
        report = subproduct_experiment(
            spec.algebra, k=args.k, salt_bits=salt_bits, trials=args.trials,
            seed=args.seed, additive_generators=spec.additive_generators,
            threads=args.threads)
        return echo, report

    params = GenParams(c=args.c, k=args.k)
    n = spec.effective_n(salt_bits=salt_bits, n_override=args.n)
    echo.update({"c": args.c, "k": params.resolved_k(), "n": n})
    if args.command == "gen-additive":
        report = gen_additive_experiment(
            spec.algebra, n=n, salt_bits=salt_bits, params=params,
            trials=args.trials, seed=args.seed, generators=spec.generators,
            threads=args.threads)
    elif args.command == "gen-ideal":
        t = _parse_t(args.t, spec.algebra.size)
        echo.update({"t": list(t), "reduce": bool(args.reduce)})
        report = gen_ideal_experiment(
            spec.algebra, t, n=n, salt_bits=salt_bits, params=params,
            trials=args.trials, seed=args.seed, generators=spec.generators,
            reduce_output=bool(args.reduce), threads=args.threads)
    else:
        basis = load_identity_basis(args.basis)
        echo["basis"] = Path(args.basis).name
        report = decide_variety_experiment(
            spec.algebra, basis, n=n, salt_bits=salt_bits, params=params,
            trials=args.trials, seed=args.seed, generators=spec.generators,
            threads=args.threads)
    return echo, report


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        echo, report = _run(args)
    except (SpecError, BadConstantError, NonNilpotentBasisError,
            SizeOverflowError) as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE_ERROR
    full = {"command": echo, **report}
    text = render_report(full)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    elapsed = time.perf_counter() - started
    print(f"{args.command}: {args.trials} trials in {elapsed:.2f}s "
          f"(bound satisfied: {report['bounds']['satisfied']})", file=sys.stderr)
    return 0 if report["bounds"]["satisfied"] else 1


if __name__ == "__main__":
    sys.exit(main())
