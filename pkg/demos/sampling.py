"""Reproducible sampling of the polymer amplitude and of range-conditioned walks.

Run with ``python demos/sampling.py``.
"""

from collections import Counter

from rangepolymer import (
    RangeEvent,
    chi_square_gof,
    partition_exact,
    sample_paths_conditioned,
    sample_range,
)


def main():
    _, law = partition_exact(2000, 0.05)
    one = sample_range(law, seed=2024, count=200_000, workers=1)
    four = sample_range(law, seed=2024, count=200_000, workers=4)
    print(f"identical draws with 1 and 4 workers: {one.to_bytes() == four.to_bytes()}")
    stat, pval = chi_square_gof(one, law)
    print(f"chi-square against the exact law: stat={stat:.1f}, p={pval:.3f}")
    print(f"first draws (T_n, 2 W_n): {one.draws[:5]}")

    e = RangeEvent(2, 2, 8)
    paths = sample_paths_conditioned(e, seed=7, count=30_000)
    freq = Counter("".join("+" if s > 0 else "-" for s in p.steps) for p in paths)
    print(f"\nwalks of 8 steps with range exactly [-2, 2]: {len(freq)} distinct paths seen")
    for word, c in freq.most_common(3):
        print(f"  {word}  {c}")
    for word, c in freq.most_common()[-2:]:
        print(f"  {word}  {c}")


if __name__ == "__main__":
    main()
