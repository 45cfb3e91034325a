"""Drive the four CLI experiments over every shipped algebra description
and write one JSON report per run.

Defaults are sized for a quick desk check (about a minute); pass
--trials-scale 10 to reproduce the full acceptance-level sweeps.  The
process exit code is the number of runs whose bound check failed."""

import argparse
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from expgroups.cli import main as cli_main  # noqa: E402

SPEC_DIR = ROOT / "specs"
BASIS_DIR = ROOT / "bases"

GEN_SPECS = ["z6_ring", "m2z2", "d4", "s4", "z6_ring_with_one", "rmodule_sqrt2"]
IDEAL_CASES = [("ut2z2", "2"), ("m2z2", "1"), ("d4", "2")]
DECIDE_CASES = [
    ("z6_ring", "commutative_rings"),
    ("m2z2", "commutative_rings"),
    ("d4", "abelian"),
    ("d4", "nilpotent_class2"),
    ("z6_ring", "abelian"),
    ("m2z2", "nilpotent_class2"),
]
SUBPRODUCT_CASES = [(name, k) for name in ["z8", "d4", "z2_cubed"] for k in (3, 7)]


def build_jobs(scale: int, seed: int):
    jobs = []
    for i, name in enumerate(GEN_SPECS):
        jobs.append((f"gen_additive_{name}", [
            "gen-additive", "--spec", str(SPEC_DIR / f"{name}.json"),
            "--trials", str(1000 * scale), "--seed", str(seed + i),
        ]))
    for i, (name, t) in enumerate(IDEAL_CASES):
        jobs.append((f"gen_ideal_{name}", [
            "gen-ideal", "--spec", str(SPEC_DIR / f"{name}.json"), "--t", t,
            "--trials", str(1000 * scale), "--seed", str(seed + 100 + i),
        ]))
    for i, (name, basis) in enumerate(DECIDE_CASES):
        jobs.append((f"decide_{name}_{basis}", [
            "decide-variety", "--spec", str(SPEC_DIR / f"{name}.json"),
            "--basis", str(BASIS_DIR / f"{basis}.json"),
            "--trials", str(100 * scale), "--seed", str(seed + 200 + i),
        ]))
    for i, (name, k) in enumerate(SUBPRODUCT_CASES):
        jobs.append((f"subproduct_{name}_k{k}", [
            "subproduct-bound", "--spec", str(SPEC_DIR / f"{name}.json"),
            "--k", str(k),
            "--trials", str(10000 * scale), "--seed", str(seed + 300 + i),
        ]))
    return jobs


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--outdir", default=str(ROOT / "reports"),
                        help="directory for the JSON reports")
    parser.add_argument("--trials-scale", type=int, default=1,
                        help="multiplier on the per-run trial counts")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    violations = 0
    for label, argv_run in build_jobs(args.trials_scale, args.seed):
        code = cli_main(argv_run + ["--out", str(outdir / f"{label}.json")])
        if code != 0:
            violations += 1
            print(f"BOUND VIOLATED: {label}", file=sys.stderr)
    print(f"wrote {len(build_jobs(args.trials_scale, args.seed))} reports to {outdir}"
          f" ({violations} bound violations)")
    return violations


if __name__ == "__main__":
    raise SystemExit(main())
