"""Fraction of seeded QAOA runs whose best sample lands within a tolerance of brute force."""

import argparse

from quc.fixtures import load_instance
from quc.qaoa import AnsatzConfig, optimize
from quc.uc import brute_force, dispatch_init


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--uc", help="unit-commitment JSON (default: bundled appendix)")
    parser.add_argument("--layers", type=int, default=2)
    parser.add_argument("--shots", type=int, default=256)
    parser.add_argument("--budget", type=int, default=60)
    parser.add_argument("--seeds", type=int, default=20)
    parser.add_argument("--tol", type=float, default=0.05)
    args = parser.parse_args()

    inst = load_instance(args.uc)
    _, best = brute_force(inst, dispatch_init(inst).P)
    hits = 0
    for seed in range(args.seeds):
        cfg = AnsatzConfig(layers=args.layers, shots=args.shots, seed=seed)
        rep = optimize(inst, cfg, budget=args.budget)
        ok = rep.best_cost.total <= (1 + args.tol) * best.total
        hits += ok
        print(f"seed {seed:3d}  {rep.best_bitstring}  {rep.best_cost.total:14.2f}  {'hit' if ok else 'miss'}")
    print(f"brute force {best.total:.2f}; {hits}/{args.seeds} within {args.tol:.0%}")


if __name__ == "__main__":
    main()
