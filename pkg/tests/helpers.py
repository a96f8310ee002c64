"""Deterministic builders shared across the test modules.

Everything here takes an explicit ``numpy.random.Generator`` (or returns a
fixed object), so each test freezes its own draws and reruns are bitwise
stable.  The dyadic constructions are deliberate: weights and masses that
are integer multiples of a power of two keep every product and partial sum
exact in binary floating point, which is what lets the additivity and
solver-agreement suites assert exact equality instead of tolerances.
"""

import numpy as np

from varsplit import LossModel, atoms


def dyadic_weights(rng: np.random.Generator, k: int) -> np.ndarray:
    """k strictly positive weights summing to exactly 1.0.

    Each weight is m/8192 for an integer m >= 1, so the weights themselves,
    their products with grid-valued losses, and all partial sums stay exact.
    """
    counts = rng.multinomial(8192 - k, np.full(k, 1.0 / k)) + 1
    return counts / 8192.0


def grid_uniform_samples(rng: np.random.Generator, n: int) -> np.ndarray:
    """Draws from uniform(0, 1) snapped to the 2**-20 grid."""
    return np.floor(rng.random(n) * 2.0**20) / 2.0**20


def integer_samples(rng: np.random.Generator, n: int) -> np.ndarray:
    """Integer-valued losses in 0..49, exact as floats."""
    return rng.integers(0, 50, size=n).astype(float)


def random_dyadic_atoms(rng: np.random.Generator, max_atoms: int = 8) -> LossModel:
    """Small atomic model with integer values and masses on the 1/256 grid.

    Integer values and dyadic masses make every cumulative mass exact, so
    the solver and the enumeration oracle see identical group feasibility
    decisions and their capitals must agree exactly, not approximately.
    """
    m = int(rng.integers(2, max_atoms + 1))
    values = np.sort(rng.choice(101, size=m, replace=False)).astype(float)
    counts = rng.multinomial(256 - m, np.full(m, 1.0 / m)) + 1
    return atoms(values, counts / 256.0)


def near_uniform_500_atoms() -> LossModel:
    """500-point discretization of uniform(0, 1) with masses on the 1/512 grid.

    The first 12 atoms carry 2/512 and the rest 1/512.  Any consecutive run
    of 25 atoms then weighs at least 25/512 > 0.048, comfortably clear of
    the 0.05 tail budget in exact arithmetic, so the minimal zero-capital
    grouping needs ceil(512/25) = 21 desks and no float rounding can sneak
    a 20-desk split past the mass check.  The 0.95-quantile still lands on
    the atom at 0.95 exactly.
    """
    values = np.arange(1, 501) / 500.0
    masses = np.concatenate([np.full(12, 2.0 / 512.0), np.full(488, 1.0 / 512.0)])
    return atoms(values, masses)
