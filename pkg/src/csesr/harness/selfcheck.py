"""Solver self-check against the exhaustive oracle on small random problems."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dictionary import SamplingMatrix, build_dictionary, draw_projection
from ..solver import TVProblem, oracle_minimize, reconstruct


def random_instance(rng: np.random.Generator, max_candidates: int = 12, n_freq: int = 8) -> TVProblem:
    """Small TV problem: up to 12 candidates, 8 grid frequencies, 3-8 projections."""
    n = int(rng.integers(2, max_candidates + 1))
    grid = np.linspace(0.0, 70.0, n_freq)
    dic = build_dictionary(grid, np.linspace(0.0, 70.0, n), 10.0)
    S = SamplingMatrix(n_freq)
    rows = int(rng.integers(3, 9))
    for _ in range(rows):
        S.append(draw_projection(rng, n_freq, int(rng.integers(1, 4))))
    a = np.zeros(n)
    a[rng.integers(0, n, size=2)] = rng.uniform(5.0, 15.0, size=2)
    A = S.apply(dic.matrix)
    y = A @ a + 0.05 * rng.standard_normal(rows)
    return TVProblem(None, None, y, float(rng.uniform(0.05, 1.0)), system=A)


@dataclass(frozen=True)
class OracleCheck:
    n_instances: int
    max_gap: float
    failures: tuple

    @property
    def passed(self) -> bool:
        return not self.failures


def oracle_check(n_instances: int = 50, seed: int = 0, tolerance: float = 1e-6,
                 grid_resolution: float = 0.5) -> OracleCheck:
    """Compare `reconstruct` with `oracle_minimize` on random instances.

    `reconstruct` runs to a tight tolerance here: the comparison is about
    the minimizer, not about the default stopping rule.
    """
    gaps, failures = [], []
    for i in range(n_instances):
        prob = random_instance(np.random.default_rng([seed, i]))
        rep = reconstruct(prob, tol=1e-14, max_iter=200_000)
        ref = oracle_minimize(prob, grid_resolution)
        gap = abs(rep.objective - ref.objective)
        gaps.append(gap)
        if gap > tolerance:
            failures.append((i, rep.objective, ref.objective))
    return OracleCheck(n_instances, float(max(gaps)) if gaps else 0.0, tuple(failures))
