"""The range-penalised polymer across weak, critical and strong penalties.

For ``h_n = n^gamma`` the optimal amplitude is ``t_star = (n pi^2 / h)^{1/3}``
and the fluctuation width ``a_n`` grows, stays bounded or collapses as
``gamma`` crosses 1/4.  Run with ``python demos/polymer_phases.py``.
"""

import math

import numpy as np

from rangepolymer import (
    partition_exact,
    scales,
    strong_support_set,
    z_asymptotic_critical,
    z_asymptotic_strong,
    z_asymptotic_weak,
)


def describe(n, gamma):
    h = n**gamma
    q = scales(n, h)
    z, law = partition_exact(n, h)
    ts, p = law.marginal_t()
    mean = float((ts * p).sum())
    sd = math.sqrt(max(float((ts**2 * p).sum()) - mean**2, 0.0))
    if gamma < 0.25:
        name, approx = "weak", z_asymptotic_weak(n, h)
    elif gamma == 0.25:
        name, approx = "critical", z_asymptotic_critical(n, h)
    else:
        name, approx = "strong", z_asymptotic_strong(n, h, form="derived")
    ratio = math.exp(approx.log_value - z.log_value)
    print(f"  gamma={gamma:+.2f} ({name:8s})  t_star={q.t_star:8.2f}  a_n={q.a_n:7.3f}  "
          f"E[T]={mean:8.2f}  sd[T]={sd:7.3f}  Z_asym/Z={ratio:.4f}")
    return law, q


def main():
    n = 10**5
    print(f"n = {n}")
    for gamma in (-0.3, 0.0, 0.25, 0.35, 0.45):
        describe(n, gamma)

    print("\nstrong penalty: the amplitude locks onto one or two lattice sites")
    for n in (10**4, 10**5, 10**6):
        h = n**0.4
        q = scales(n, h)
        _, law = partition_exact(n, h)
        s, p = law.fluctuation_pmf(q.floor_t_o)
        top = np.argsort(p)[::-1][:3]
        cells = ", ".join(f"{int(s[i]):+d}: {p[i]:.3f}" for i in sorted(top))
        print(f"  n={n:8d}  frac={q.t_o_frac:.3f}  support={sorted(strong_support_set(n, h))}  masses {cells}")


if __name__ == "__main__":
    main()
