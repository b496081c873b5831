"""Mean masked-pair fidelity and basis uniformity for H/T words of several lengths and for Euler masks."""
import argparse

from qlocverify.masking import ensemble_fidelity_stats, mask_uniformity
from qlocverify.qstate import make_rng


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pairs", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print(f"{'k':>2} {'mask':>8} {'mean F':>8} {'std F':>8}  uniformity")
    for k in (2, 3):
        kinds = [("ht", n) for n in (1, 3, 5, 9)] + [("euler", 0)]
        for i, (kind, length) in enumerate(kinds):
            rng = make_rng(args.seed, k, i)
            mean, std = ensemble_fidelity_stats(k, kind, args.pairs, rng, ht_length=max(length, 1))
            uni = mask_uniformity(k, kind, args.pairs, rng, ht_length=max(length, 1))
            label = f"ht{length}" if kind == "ht" else "euler"
            print(f"{k:>2} {label:>8} {mean:8.4f} {std:8.4f}  " + " ".join(f"{u:.3f}" for u in uni))


if __name__ == "__main__":
    main()
