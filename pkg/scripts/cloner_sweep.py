"""Cloner pass probability versus sequence length: closed form F_c**N next to a Bernoulli Monte Carlo estimate."""
import argparse
import math

from qlocverify.adversary import bernoulli_pass_rate
from qlocverify.protocol import confidence_against_cloner
from qlocverify.qstate import make_rng


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print(f"{'F_c':>4} {'N':>4} {'analytic':>12} {'empirical':>12} {'sigma':>10}")
    for F_c in (0.7, 0.6):
        for N in (1, 5, 10, 20, 50, 100):
            p = confidence_against_cloner(N, F_c)
            # Monte Carlo is pointless once p * trials << 1
            if p * args.trials < 1:
                print(f"{F_c:4.1f} {N:4d} {p:12.4e} {'-':>12} {'-':>10}")
                continue
            rate = bernoulli_pass_rate(N, F_c, args.trials, make_rng(args.seed, N))
            sigma = math.sqrt(p * (1 - p) / args.trials)
            print(f"{F_c:4.1f} {N:4d} {p:12.4e} {rate:12.4e} {sigma:10.2e}")


if __name__ == "__main__":
    main()
