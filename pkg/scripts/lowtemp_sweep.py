#!/usr/bin/env python3
"""Watch the joint diameter/min-distance moment approach its cold limit.

Sweeps the inverse temperature and prints the relative gap between the float
moment and the exact zero-temperature value.
"""

import argparse
from fractions import Fraction

from padicgas.domain import ChargeVector
from padicgas.evaluate import expectation, low_temp_limit
from padicgas.rho import RhoSpec


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=3)
    parser.add_argument("--q", type=int, default=2)
    parser.add_argument("--a", type=int, default=1)
    parser.add_argument("--b", type=int, default=1)
    parser.add_argument("--rho", default="ball:0")
    parser.add_argument("--betas", default="1,2,5,10,20,40,60")
    args = parser.parse_args()

    rho = RhoSpec.parse(args.rho)
    limit = low_temp_limit(
        args.n, args.q, ChargeVector.build([1] * args.n, 1), args.a, args.b, rho
    )
    reference = complex(Fraction(limit.value.value))
    print(f"cold limit = {limit.value.value}   "
          f"(minimized interaction weight {limit.min_interaction})")
    print(f"{'beta':>8} {'moment':>24} {'relative gap':>14}")
    for text in args.betas.split(","):
        beta = float(text)
        cv = ChargeVector.build([1] * args.n, beta)
        value = expectation(args.n, args.q, cv, args.a, args.b, rho).as_complex()
        gap = abs(value - reference) / abs(reference)
        print(f"{beta:>8.1f} {value.real:>24.16g} {gap:>14.3e}")


if __name__ == "__main__":
    main()
