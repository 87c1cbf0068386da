"""Strip confinement and the law of the range endpoints.

Run with ``python demos/ruin_and_range.py``.
"""

import math

from rangepolymer import (
    ExitSide,
    RangeEvent,
    Regime,
    StripQuery,
    confinement_asymptotic,
    confinement_exact,
    decay_rate,
    feller_exit_pmf,
    range_event_exact,
    range_event_fraction,
    theta_asymptotic,
)


def main():
    print("decay rate g(T) against its leading term pi^2 / (2 T^2)")
    for T in (5, 20, 100):
        print(f"  T={T:4d}  g={decay_rate(T):.6e}  leading={math.pi**2 / (2 * T * T):.6e}")

    print("\nconfinement in a strip of width 15 started at 7")
    for n in (10, 100, 1000, 10000):
        q = StripQuery(7, 15, n)
        ex, asym = confinement_exact(q), confinement_asymptotic(q)
        print(f"  n={n:6d}  exact={ex.value:.6e}  one-mode={asym.value.value:.6e}")

    q = StripQuery(1, 3, 3)
    print(f"\nexit at the bottom of a width-3 strip at step 3 from 1: {feller_exit_pmf(q, ExitSide.BOTTOM).value}")

    print("\nexact small-n range probabilities as fractions")
    for x, y, n in [(1, 1, 3), (0, 1, 1), (2, 2, 8)]:
        print(f"  P(range = [{-x}, {y}] after {n} steps) = {range_event_fraction(RangeEvent(x, y, n))}")

    T = 30
    n = 10**6
    print(f"\nrange profile at T={T}, n={n}: exact against the long-time form")
    for x in (0, 5, 15):
        e = RangeEvent(x, T - x, n)
        ex = range_event_exact(e).log_value
        th = theta_asymptotic(e, Regime.supercritical()).log_value
        print(f"  x={x:2d}  log exact={ex:.6f}  log approx={th:.6f}  ratio={math.exp(th - ex):.4f}")


if __name__ == "__main__":
    main()
