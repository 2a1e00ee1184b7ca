"""Characterize the change-point detector: recovery rate and runtime.

Two sweeps on synthetic standard-normal series with mean shifts at 1/3
and 2/3 of the length:

* recovery rate vs shift size (how large a shift the permutation test
  resolves at the default significance level), and
* wall-clock time vs series length at a fixed +3-sigma shift.

    python3 scripts/segmentation_benchmark.py --runs 20
"""

from __future__ import annotations

import time

import click
import numpy as np

from sessionlens.filters.segments import e_divisive

TOLERANCE = 5  # indices; a shift counts as recovered within this window


def shifted_series(rng: np.random.Generator, n: int, shift: float) -> np.ndarray:
    x = rng.standard_normal(n)
    x[n // 3:] += shift
    x[2 * n // 3:] += shift
    return x


def recovered(change_points: list[int], n: int) -> bool:
    return (any(abs(c - n // 3) <= TOLERANCE for c in change_points)
            and any(abs(c - 2 * n // 3) <= TOLERANCE for c in change_points))


@click.command()
@click.option("--runs", type=int, default=20, help="Seeded runs per cell.")
@click.option("--n", "n_points", type=int, default=300,
              help="Series length for the shift sweep.")
@click.option("--perms", type=int, default=199)
@click.option("--min-size", type=int, default=30)
def main(runs: int, n_points: int, perms: int, min_size: int) -> None:
    click.echo(f"recovery vs shift size  (n={n_points}, {runs} runs, "
               f"{perms} permutations, tolerance +/-{TOLERANCE})")
    click.echo(f"{'shift':>6} {'both found':>11} {'mean cps':>9} {'s/run':>7}")
    for shift in (0.5, 1.0, 1.5, 2.0, 3.0):
        hits, cps_total = 0, 0
        t0 = time.monotonic()
        for run in range(runs):
            rng = np.random.default_rng(run)
            result = e_divisive(shifted_series(rng, n_points, shift),
                                min_size=min_size, n_permutations=perms,
                                seed=run)
            hits += recovered(result.change_points, n_points)
            cps_total += len(result.change_points)
        per_run = (time.monotonic() - t0) / runs
        click.echo(f"{shift:6.1f} {hits:>5}/{runs:<5} {cps_total / runs:9.2f} "
                   f"{per_run:7.3f}")

    click.echo(f"\nruntime vs length  (+3-sigma shifts, {runs} runs)")
    click.echo(f"{'n':>6} {'both found':>11} {'s/run':>7}")
    for n in (150, 300, 600, 1200):
        hits = 0
        t0 = time.monotonic()
        for run in range(runs):
            rng = np.random.default_rng(run)
            result = e_divisive(shifted_series(rng, n, 3.0),
                                min_size=min_size, n_permutations=perms,
                                seed=run)
            hits += recovered(result.change_points, n)
        per_run = (time.monotonic() - t0) / runs
        click.echo(f"{n:>6} {hits:>5}/{runs:<5} {per_run:7.3f}")


if __name__ == "__main__":
    main()
