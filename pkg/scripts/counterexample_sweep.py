"""Sweep the range-projection commutator over the Blaschke parameter and truncation size.

    python3 scripts/counterexample_sweep.py --a 0 0.25 0.5 0.75 --N 32 64 128
"""
import argparse
import json
import math

from interaction_groups.fock import counterexample_pipeline


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.split("\n")[1])
    p.add_argument("--a", type=float, nargs="+", default=[0.0, 0.25, 0.5, 0.75])
    p.add_argument("--N", type=int, nargs="+", default=[32, 64, 128])
    p.add_argument("--json", action="store_true", help="print JSON rows instead of a table")
    args = p.parse_args()

    rows = []
    for a in args.a:
        for N in args.N:
            rep = counterexample_pipeline(a, N)
            rows.append({"a": a, "N": N, "delta": rep.data["range_commutator"],
                         "closed_form": a * math.sqrt(1 - a * a),
                         "obstructed": "counterexample.no_extension" in rep, "ok": rep.ok})
    if args.json:
        print(json.dumps(rows, indent=2))
        return
    print(f"{'a':>6} {'N':>5} {'delta':>20} {'|a|sqrt(1-|a|^2)':>20} obstructed")
    for r in rows:
        print(f"{r['a']:6.3f} {r['N']:5d} {r['delta']:20.16f} {r['closed_form']:20.16f} {r['obstructed']}")


if __name__ == "__main__":
    main()
