"""Test problems: the quadratic-regression grid and seeded random instances."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import DesignInstance, InvalidInstanceError

#: Bit generator behind :func:`random_instance` (counter-based Philox4x64).
BIT_GENERATOR = "Philox"

MAX_RANK_RETRIES = 100


def quadratic_grid_coordinates(grid_size: int = 101):
    """Row-major grid coordinates ``(r1, r2)`` in ``[0, 1]^2``."""
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    x = np.arange(grid_size * grid_size)
    i, j = np.divmod(x, grid_size)
    return i / (grid_size - 1), j / (grid_size - 1)


def quadratic_grid_instance(grid_size: int = 101) -> DesignInstance:
    """Full quadratic model in two factors on a square grid.

    Regressors are ``(1, r1, r2, r1^2, r2^2, r1 r2)`` and costs
    ``0.1 + 6 r1 + r2``.  Costs are formed from the integer grid indices so
    that points on the line ``6 r1 + r2 = 0.9`` get a cost of exactly one.
    """
    r1, r2 = quadratic_grid_coordinates(grid_size)
    x = np.arange(grid_size * grid_size)
    i, j = np.divmod(x, grid_size)
    span = grid_size - 1
    F = np.column_stack([np.ones_like(r1), r1, r2, r1**2, r2**2, r1 * r2])
    costs = (0.1 * span + 6 * i + j) / span
    return DesignInstance(F, costs, tuple(str(k + 1) for k in x))


@dataclass(frozen=True)
class RandomSpec:
    """Random problem family.

    ``p0`` is the share of unit-cost points and ``ppm`` the share of
    high-cost points among the remaining ones.
    """

    n: int = 600
    m: int = 4
    p0: float = 0.5
    ppm: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be positive")
        if not (0.0 <= self.p0 <= 1.0 and 0.0 <= self.ppm <= 1.0):
            raise ValueError("p0 and ppm must lie in [0, 1]")
        if self.m > self.n:
            raise ValueError("need at least m points")

    @property
    def counts(self) -> tuple[int, int, int]:
        n_plus = int(np.floor((1 - self.p0) * self.ppm * self.n))
        n_minus = int(np.floor((1 - self.p0) * (1 - self.ppm) * self.n))
        return n_plus, n_minus, self.n - n_plus - n_minus


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _draw_open_unit(rng, size):
    u = rng.random(size)
    while np.any(u == 0.0):
        bad = u == 0.0
        u[bad] = rng.random(int(bad.sum()))
    return u


def random_instance(spec: RandomSpec) -> DesignInstance:
    """Seeded random instance.

    High costs are ``1 - log(u)`` (one plus a unit exponential), low costs
    are uniform on ``(0, 1)``, the rest equal one.  Regressors are i.i.d.
    standard normal and are redrawn from the same stream until they span
    R^m.  Points are ordered high, low, unit.
    """
    n_plus, n_minus, n_zero = spec.counts
    rng = make_rng(spec.seed)
    high = 1.0 - np.log(_draw_open_unit(rng, n_plus))
    while np.any(high <= 1.0):
        bad = high <= 1.0
        high[bad] = 1.0 - np.log(_draw_open_unit(rng, int(bad.sum())))
    low = _draw_open_unit(rng, n_minus)
    costs = np.concatenate([high, low, np.ones(n_zero)])
    for _ in range(MAX_RANK_RETRIES):
        F = rng.standard_normal((spec.n, spec.m))
        if np.linalg.matrix_rank(F) == spec.m and np.all(np.any(F != 0, axis=1)):
            return DesignInstance(F, costs)
    raise InvalidInstanceError(
        f"no full-rank regressors after {MAX_RANK_RETRIES} draws")
