"""Compare the concrete crossed products built from the GNS and regular representations.

    python3 scripts/two_models.py --count 10 --seed 0
"""
import argparse

from interaction_groups.algebra import AlgState
from interaction_groups.covariance import gns_from_state, two_model_check
from interaction_groups.instances import cyclic_shift_z3, flip_expectation_z2
from interaction_groups.modules import regular_rep

EXAMPLES = {"m2_z2_flip": flip_expectation_z2, "cyclic_shift_z3": cyclic_shift_z3}


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.split("\n")[1])
    p.add_argument("--example", choices=sorted(EXAMPLES), default="m2_z2_flip")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    ig = EXAMPLES[args.example]()
    gns = gns_from_state(ig, AlgState.trace(ig.alg))
    out = two_model_check(gns, regular_rep(ig), count=args.count, seed=args.seed)
    print(out.text())
    for a, b in out["models.same_norms"].witness["norms"]:
        print(f"  {a:.12f}  {b:.12f}")


if __name__ == "__main__":
    main()
