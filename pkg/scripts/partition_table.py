#!/usr/bin/env python3
"""Tabulate exact canonical partition function values for unit-charge gases.

Each row is one (n, q, beta); the value is the density-weighted integral at
s_ij = beta for all pairs, with the unit-ball density.
"""

import argparse
from fractions import Fraction

from padicgas.domain import ChargeVector
from padicgas.evaluate import mehta_partition
from padicgas.rho import RhoSpec


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-max", type=int, default=5)
    parser.add_argument("--q", default="2,3,5")
    parser.add_argument("--betas", default="1,2,3")
    args = parser.parse_args()

    qs = [int(x) for x in args.q.split(",")]
    betas = [Fraction(x) for x in args.betas.split(",")]
    rho = RhoSpec.ball(0)
    print(f"{'n':>3} {'q':>3} {'beta':>6}  partition function")
    for n in range(2, args.n_max + 1):
        for q in qs:
            for beta in betas:
                cv = ChargeVector.build([1] * n, beta)
                value = mehta_partition(n, q, cv, rho).value
                print(f"{n:>3} {q:>3} {str(beta):>6}  {value}")


if __name__ == "__main__":
    main()
