"""Problem data, information matrices and variance functions.

A problem lives on a finite design space of ``n`` points.  Each point has a
regressor ``f(x)`` in R^m and a normalized cost ``c_x > 0``.  Designs are
nonnegative weight vectors over the points; the two linear constraints of
interest are ``sum(w) = 1`` (size) and ``sum(c * w) = 1`` (cost).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg.lapack import dpotrf, dtrtrs

#: Relative pivot floor used to declare an information matrix singular.
PIVOT_RTOL = 1e-12

#: Default tolerance on the size and cost residuals of a feasible design.
TOL_FEAS = 1e-9


class SingularDesignError(ValueError):
    """Raised when an operation needs a nonsingular information matrix."""


class InvalidInstanceError(ValueError):
    """Raised when problem data violate the design-space assumptions."""


@dataclass(frozen=True)
class DesignInstance:
    """Finite design space with regressors and normalized costs.

    Parameters
    ----------
    F : ndarray (n, m)
        Regressor ``f(x)`` of every point, one per row.
    costs : ndarray (n,)
        Normalized costs, strictly positive.
    ids : sequence of str, optional
        Point labels; defaults to ``"1"..."n"``.
    """

    F: np.ndarray
    costs: np.ndarray
    ids: tuple = ()

    def __post_init__(self):
        F = np.array(self.F, dtype=float)
        if F.ndim == 1:
            F = F[:, None]
        costs = np.array(self.costs, dtype=float).reshape(-1)
        n = F.shape[0]
        ids = tuple(str(i) for i in self.ids) if len(self.ids) else tuple(
            str(i + 1) for i in range(n))
        if n < 1:
            raise InvalidInstanceError("design space is empty")
        if costs.shape[0] != n:
            raise InvalidInstanceError(
                f"got {costs.shape[0]} costs for {n} regressors")
        if len(ids) != n:
            raise InvalidInstanceError(f"got {len(ids)} ids for {n} points")
        if len(set(ids)) != n:
            raise InvalidInstanceError("point ids are not unique")
        if not np.all(np.isfinite(F)) or not np.all(np.isfinite(costs)):
            raise InvalidInstanceError("non-finite regressor or cost")
        if np.any(costs <= 0):
            bad = ids[int(np.argmax(costs <= 0))]
            raise InvalidInstanceError(f"cost of point {bad!r} is not positive")
        zero_rows = ~np.any(F != 0, axis=1)
        if np.any(zero_rows):
            bad = ids[int(np.argmax(zero_rows))]
            raise InvalidInstanceError(f"regressor of point {bad!r} is zero")
        if np.linalg.matrix_rank(F) < F.shape[1]:
            raise InvalidInstanceError(
                f"regressors do not span R^{F.shape[1]}")
        F.setflags(write=False)
        costs.setflags(write=False)
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "costs", costs)
        object.__setattr__(self, "ids", ids)

    @property
    def n(self) -> int:
        return self.F.shape[0]

    @property
    def m(self) -> int:
        return self.F.shape[1]

    def with_costs(self, costs) -> "DesignInstance":
        return DesignInstance(self.F, costs, self.ids)


@dataclass(frozen=True)
class CostPartition:
    """Split of the points by cost relative to one.

    ``plus`` holds points with ``c > 1`` and margins ``delta_plus = c - 1``,
    ``minus`` holds points with ``c < 1`` and ``delta_minus = 1 - c``, and
    ``zero`` holds unit-cost points.
    """

    plus: np.ndarray
    minus: np.ndarray
    zero: np.ndarray
    delta_plus: np.ndarray
    delta_minus: np.ndarray
    n: int

    @property
    def n_plus(self) -> int:
        return len(self.plus)

    @property
    def n_minus(self) -> int:
        return len(self.minus)

    @property
    def n_zero(self) -> int:
        return len(self.zero)

    @property
    def n_tilde(self) -> int:
        """Number of extreme points of the feasible polytope."""
        return self.n_plus * self.n_minus + self.n_zero

    @property
    def delta(self) -> np.ndarray:
        """Full-length margin vector; zero on unit-cost points."""
        out = np.zeros(self.n)
        out[self.plus] = self.delta_plus
        out[self.minus] = self.delta_minus
        return out


def partition(instance: DesignInstance, tol_one: float = 0.0) -> CostPartition:
    """Partition points into high-, low- and unit-cost strata.

    Costs within ``tol_one`` of one are treated as exactly one.
    """
    c = instance.costs
    plus = np.flatnonzero(c > 1.0 + tol_one)
    minus = np.flatnonzero(c < 1.0 - tol_one)
    zero = np.flatnonzero((c <= 1.0 + tol_one) & (c >= 1.0 - tol_one))
    return CostPartition(plus=plus, minus=minus, zero=zero,
                         delta_plus=c[plus] - 1.0, delta_minus=1.0 - c[minus],
                         n=instance.n)


@dataclass(frozen=True)
class InformationState:
    """Information matrix of a design together with its Cholesky factor.

    ``factor`` is the lower-triangular ``L`` with ``M = L L^T``; it is
    ``None`` when the matrix is numerically singular, in which case
    ``logdet`` is ``-inf`` and ``phi`` is zero.
    """

    M: np.ndarray
    factor: Optional[np.ndarray]
    logdet: float
    phi: float

    @property
    def regular(self) -> bool:
        return self.factor is not None

    @property
    def m(self) -> int:
        return self.M.shape[0]


def _cholesky(M: np.ndarray) -> Optional[np.ndarray]:
    factor = _factor_logdet(M)
    return None if factor is None else factor[0]


def _factor_logdet(M: np.ndarray):
    """Lower Cholesky factor and log-determinant, or ``None`` if singular.

    Only the lower triangle of ``M`` is read.
    """
    scale = M.trace() / M.shape[0]
    if not 0.0 < scale < np.inf:
        return None
    # raw LAPACK: the wrappers' validation dominates for small m
    L, info = dpotrf(M, lower=1, clean=1)
    if info != 0:
        return None
    pivots = L.diagonal() ** 2
    if pivots.min() < PIVOT_RTOL * scale:
        return None
    return L, float(np.log(pivots).sum())


def information_matrix(F: np.ndarray, w: np.ndarray) -> np.ndarray:
    """``M(w) = sum_x w_x f(x) f(x)^T`` as a symmetric array."""
    M = (F * w[:, None]).T @ F
    return 0.5 * (M + M.T)


def info_matrix(instance: DesignInstance, w) -> InformationState:
    """Evaluate the information matrix and D-criterion of design ``w``."""
    w = np.asarray(w, dtype=float)
    if w.shape != (instance.n,):
        raise ValueError(f"design has shape {w.shape}, expected ({instance.n},)")
    return info_state(information_matrix(instance.F, w))


def info_state(M: np.ndarray) -> InformationState:
    factor = _factor_logdet(M)
    if factor is None:
        return InformationState(M=M, factor=None, logdet=-np.inf, phi=0.0)
    L, logdet = factor
    return InformationState(M=M, factor=L, logdet=logdet,
                            phi=float(np.exp(logdet / M.shape[0])))


def phi(instance: DesignInstance, w) -> float:
    """D-criterion ``det(M(w))^(1/m)``; zero for singular designs."""
    return info_matrix(instance, w).phi


def quad_forms(L: np.ndarray, F: np.ndarray) -> np.ndarray:
    """Row-wise ``f^T (L L^T)^{-1} f`` through one triangular solve."""
    Z, info = dtrtrs(L, F.T, lower=1)
    if info != 0:
        raise SingularDesignError("triangular factor is singular")
    Z *= Z
    return Z.sum(axis=0)


def variance_function(instance: DesignInstance, state: InformationState,
                      points=None) -> np.ndarray:
    """Variance function ``d_x = f(x)^T M^{-1} f(x)``.

    Parameters
    ----------
    points : index array, optional
        Evaluate only at these points; all points by default.
    """
    if not state.regular:
        raise SingularDesignError("information matrix is singular")
    F = instance.F if points is None else instance.F[points]
    return quad_forms(state.factor, F)


def pair_kernel(delta_plus: np.ndarray, delta_minus: np.ndarray) -> np.ndarray:
    """``delta_+ delta_- / (delta_+ + delta_-)`` for every pair.

    This is the reciprocal of ``(1/delta_+) (+) (1/delta_-)`` and does not
    depend on the design, so solvers cache it per active set.
    """
    dp = delta_plus[:, None]
    dm = delta_minus[None, :]
    return dp * dm / (dp + dm)


def weighted_variances(part: CostPartition, d: np.ndarray) -> np.ndarray:
    """Dense ``n_plus x n_minus`` matrix of pairwise weighted variances.

    Entry ``(i, j)`` is the convex combination
    ``(delta_i d_j + delta_j d_i) / (delta_i + delta_j)`` of the variances
    of the ``i``-th high-cost and ``j``-th low-cost point, written as an
    outer sum of ``d / delta`` scaled by the pair kernel.
    """
    d = np.asarray(d, dtype=float)
    a = d[part.plus] / part.delta_plus
    b = d[part.minus] / part.delta_minus
    return (a[:, None] + b[None, :]) * pair_kernel(part.delta_plus,
                                                   part.delta_minus)


def iter_weighted_variance_blocks(part: CostPartition, d: np.ndarray,
                                  block_rows: int):
    """Yield ``(row_slice, block)`` pieces of :func:`weighted_variances`.

    Keeps peak memory at ``block_rows * n_minus`` entries.
    """
    if block_rows < 1:
        raise ValueError("block_rows must be positive")
    d = np.asarray(d, dtype=float)
    a = d[part.plus] / part.delta_plus
    b = d[part.minus] / part.delta_minus
    for start in range(0, part.n_plus, block_rows):
        rows = slice(start, min(start + block_rows, part.n_plus))
        K = pair_kernel(part.delta_plus[rows], part.delta_minus)
        yield rows, (a[rows, None] + b[None, :]) * K


def s_of(w, part: CostPartition) -> float:
    """``S(w) = sum over high-cost points of delta * w``.

    For a design satisfying both equality constraints this equals the
    matching sum over the low-cost points.
    """
    w = np.asarray(w, dtype=float)
    return float(np.dot(part.delta_plus, w[part.plus]))


def feasibility_residuals(w, instance: DesignInstance) -> tuple[float, float]:
    """Absolute residuals ``(|sum w - 1|, |sum c w - 1|)``."""
    w = np.asarray(w, dtype=float)
    return (abs(float(w.sum()) - 1.0),
            abs(float(instance.costs @ w) - 1.0))


def is_feasible(w, instance: DesignInstance, tol: float = TOL_FEAS) -> bool:
    w = np.asarray(w, dtype=float)
    r_size, r_cost = feasibility_residuals(w, instance)
    return bool(np.all(w >= 0) and r_size <= tol and r_cost <= tol)


def h_threshold(m: int, epsilon: float) -> float:
    """Deletion threshold for a design with efficiency gap ``epsilon``.

    ``h_m(eps) = m (1 + eps/2 - sqrt(eps (4 + eps - 4/m)) / 2)``; any point
    whose (weighted) variance is strictly below it cannot support an
    optimal design.  ``h_m(0) = m`` and ``h_m`` decreases in ``eps``.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    return m * (1.0 + epsilon / 2.0
                - np.sqrt(epsilon * (4.0 + epsilon - 4.0 / m)) / 2.0)
