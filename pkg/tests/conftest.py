"""Shared random-model generators for the test suite.

All generators take an explicit numpy Generator so each test controls its
own seed; nothing here reads global RNG state.
"""

from __future__ import annotations

import numpy as np

from maxacc import FiniteStateModel, LinearGaussianModel
from maxacc.errors import NotDetectableOrStabilizable, RankDeficientDorH
from maxacc.lingauss import is_stable, validate_model

# One line per acceptance criterion, filled in by tests/test_acceptance.py
# and echoed after the run so the gate outcome is visible without -s.
acceptance_lines: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)


def random_finite_model(
    rng: np.random.Generator,
    d_max: int = 6,
    tie_prob: float = 0.0,
    n_obs: int = 1,
) -> FiniteStateModel:
    """Random irreducible finite model with random sparsity.

    A directed cycle 0 -> 1 -> ... -> 0 is always present, so the chain has a
    unique stationary law. With probability tie_prob one observation row is
    copied onto another, exercising the tie-handling paths.
    """
    d = int(rng.integers(2, d_max + 1))
    L = np.zeros((d, d))
    for i in range(d):
        for j in range(d):
            if i != j and rng.random() < 0.6:
                L[i, j] = float(rng.uniform(0.1, 2.0))
        L[i, (i + 1) % d] = max(L[i, (i + 1) % d], 0.3)
    np.fill_diagonal(L, 0.0)
    np.fill_diagonal(L, -L.sum(axis=1))
    h = rng.uniform(-1.0, 2.0, size=(d, n_obs))
    if d >= 2 and rng.random() < tie_prob:
        i, j = rng.choice(d, size=2, replace=False)
        h[int(j)] = h[int(i)]
    return FiniteStateModel(L, h)


def random_stable_lg(rng: np.random.Generator, p_max: int = 4) -> LinearGaussianModel:
    """Random stable model: shift a Gaussian matrix left of the imaginary axis."""
    p = int(rng.integers(1, p_max + 1))
    m = int(rng.integers(1, p + 1))
    n = int(rng.integers(1, p + 1))
    while True:
        M = rng.standard_normal((p, p))
        shift = float(np.max(np.linalg.eigvals(M).real)) + float(rng.uniform(0.3, 1.5))
        try:
            return LinearGaussianModel(
                M - shift * np.eye(p),
                rng.standard_normal((p, m)),
                rng.standard_normal((n, p)),
            )
        except RankDeficientDorH:
            continue


def random_unstable_lg(rng: np.random.Generator, p_max: int = 4) -> LinearGaussianModel:
    """Random unstable but detectable and stabilizable model (rejection sampled)."""
    while True:
        p = int(rng.integers(2, p_max + 1))
        m = int(rng.integers(1, p + 1))
        n = int(rng.integers(1, p + 1))
        A = rng.standard_normal((p, p)) + float(rng.uniform(0.1, 1.0)) * np.eye(p)
        if is_stable(A):
            continue
        try:
            model = LinearGaussianModel(
                A, rng.standard_normal((p, m)), rng.standard_normal((n, p))
            )
            validate_model(model)
        except (RankDeficientDorH, NotDetectableOrStabilizable):
            continue
        return model
