"""Multiplicative algorithm for D-optimal designs on a simplex."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .model import (CostPartition, DesignInstance, _factor_logdet,
                    h_threshold, quad_forms)


class DegenerateSupportError(ValueError):
    """All regressors of the restricted design space are zero."""


@dataclass(frozen=True)
class StandardOptions:
    target_eff: float = 0.99999
    max_iters: int = 200_000
    restrict_to: Optional[np.ndarray] = None
    #: Apply the variance-based deletion rule every this many iterations.
    deletion_interval: Optional[int] = None

    def __post_init__(self):
        if not 0.0 < self.target_eff < 1.0:
            raise ValueError("target_eff must lie in (0, 1)")
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")


@dataclass
class StandardResult:
    w: np.ndarray
    iterations: int
    eff_lb: float
    #: Dimension of the span of the restricted regressors.
    rank: int
    phi: float


def _span_coordinates(F: np.ndarray) -> np.ndarray:
    """Express rows of ``F`` in an orthonormal basis of their span."""
    _, s, Vt = np.linalg.svd(F, full_matrices=False)
    tol = s[0] * max(F.shape) * np.finfo(float).eps if len(s) else 0.0
    r = int(np.sum(s > tol))
    if r == 0:
        raise DegenerateSupportError("restricted regressors are all zero")
    if r == F.shape[1]:
        return F
    return F @ Vt[:r].T


def solve_standard_multiplicative(
        instance: DesignInstance,
        opts: StandardOptions = StandardOptions(),
        stop_when: Optional[Callable[[float, float], bool]] = None,
) -> StandardResult:
    """Approximate D-optimal design under ``sum(w) = 1`` alone.

    Runs ``w <- w * d(w) / m`` from the uniform design on the restricted
    index set, stopping once the efficiency bound ``m / max d`` reaches
    ``opts.target_eff``.  If the restricted regressors span only an
    ``r``-dimensional subspace the problem is solved in that subspace.

    ``stop_when(phi, eff_lb)`` may end the run early; ``phi`` there is the
    full-dimension criterion (zero when ``r < m``).
    """
    n = instance.n
    idx = (np.arange(n) if opts.restrict_to is None
           else np.asarray(opts.restrict_to, dtype=int))
    if len(idx) == 0:
        raise DegenerateSupportError("restricted index set is empty")
    G = _span_coordinates(instance.F[idx])
    r = G.shape[1]
    full_rank = r == instance.m
    active = np.arange(len(idx))
    v = np.full(len(idx), 1.0 / len(idx))

    it = 0
    last_deletion = -1
    Ga, GaT = G, np.ascontiguousarray(G.T)
    while True:
        va = v[active]
        factor = _factor_logdet((GaT * va) @ Ga)
        if factor is None:
            raise DegenerateSupportError("information matrix became singular")
        L, logdet = factor
        d = quad_forms(L, Ga)
        dmax = float(d.max())
        eff = min(1.0, r / dmax)
        phi = math.exp(logdet / r) if full_rank else 0.0
        if eff >= opts.target_eff or it >= opts.max_iters:
            break
        if stop_when is not None and stop_when(phi, eff):
            break
        if (opts.deletion_interval and it > 0 and it != last_deletion
                and it % opts.deletion_interval == 0):
            last_deletion = it
            h = h_threshold(r, max(dmax - r, 0.0))
            keep = d >= h
            if not keep.all():
                v[active[~keep]] = 0.0
                active = active[keep]
                v[active] /= v[active].sum()
                Ga = G[active]
                GaT = np.ascontiguousarray(Ga.T)
                continue
        v[active] = va * d / r
        it += 1

    w = np.zeros(n)
    w[idx] = v / v.sum()
    return StandardResult(w=w, iterations=it, eff_lb=eff, rank=r, phi=phi)


def compute_v0(instance: DesignInstance, part: CostPartition,
               target_eff: float = 1 - 1e-9, max_iters: int = 200_000) -> float:
    """Optimal D-criterion value over designs supported on unit-cost points.

    Zero when there are no unit-cost points or when their regressors do not
    span R^m, since the full information matrix is then singular.
    """
    if part.n_zero == 0:
        return 0.0
    F0 = instance.F[part.zero]
    if np.linalg.matrix_rank(F0) < instance.m:
        return 0.0
    res = solve_standard_multiplicative(
        instance, StandardOptions(target_eff=target_eff, max_iters=max_iters,
                                  restrict_to=part.zero, deletion_interval=16))
    return res.phi
