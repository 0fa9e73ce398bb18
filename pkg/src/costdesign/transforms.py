"""Reductions between constrained design problems.

Every transform returns a new :class:`DesignInstance` and a :class:`BackMap`
that turns weights of the transformed problem into weights of the original
one.  Point count, ids and order are preserved.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .model import CostPartition, DesignInstance, InvalidInstanceError


class Regime(enum.Enum):
    ALL_LOW = "AllLow"
    ALL_HIGH = "AllHigh"
    MIXED = "Mixed"


class TransformKind(enum.Enum):
    IDENTITY = "identity"
    COST_SCALING = "cost-scaling"
    GENERAL_TWO_CONSTRAINT = "general-two-constraint"


@dataclass(frozen=True)
class BackMap:
    """Per-point multiplier recovering original weights: ``w_orig = scale * w``."""

    kind: TransformKind
    scale: np.ndarray
    sqrt_scale: np.ndarray

    def __call__(self, w) -> np.ndarray:
        return self.scale * np.asarray(w, dtype=float)

    def forward(self, w_orig) -> np.ndarray:
        return np.asarray(w_orig, dtype=float) / self.scale

    @classmethod
    def identity(cls, n: int) -> "BackMap":
        return cls(TransformKind.IDENTITY, np.ones(n), np.ones(n))


def _positive(name: str, values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0 or not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise InvalidInstanceError(f"{name} must be finite and positive")
    return arr


def normalize_costs(raw_costs, N: int, B: float) -> np.ndarray:
    """Normalized costs ``(N / B) * C`` for a size limit ``N`` and budget ``B``."""
    raw = _positive("raw costs", raw_costs)
    if N < 1:
        raise InvalidInstanceError("trial count N must be at least 1")
    if not B > 0:
        raise InvalidInstanceError("budget B must be positive")
    return (N / B) * raw


def general_two_constraint_to_canonical(F, c1, c2, ids=()):
    """Rewrite ``c1 . w <= 1, c2 . w <= 1`` as size-and-cost constraints.

    The canonical problem uses ``f / sqrt(c1)`` and costs ``c2 / c1``; a
    canonical design ``w`` corresponds to ``w / c1`` in the original
    problem, with the same information matrix.
    """
    c1 = _positive("c1", c1)
    c2 = _positive("c2", c2)
    F = np.asarray(F, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    if not (len(c1) == len(c2) == F.shape[0]):
        raise InvalidInstanceError("c1, c2 and regressors differ in length")
    root = np.sqrt(c1)
    inst = DesignInstance(F / root[:, None], c2 / c1, ids)
    kind = (TransformKind.IDENTITY if np.all(c1 == 1.0)
            else TransformKind.GENERAL_TWO_CONSTRAINT)
    return inst, BackMap(kind, 1.0 / c1, root)


def cost_only_to_standard(instance: DesignInstance):
    """Turn the cost-constrained problem into a standard simplex problem.

    Returns an instance with regressors ``f / sqrt(c)`` and unit costs; a
    simplex design ``v`` maps back to ``v / c``, which spends the budget
    exactly.
    """
    c = instance.costs
    root = np.sqrt(c)
    inst = DesignInstance(instance.F / root[:, None], np.ones(instance.n),
                          instance.ids)
    kind = (TransformKind.IDENTITY if np.all(c == 1.0)
            else TransformKind.COST_SCALING)
    return inst, BackMap(kind, 1.0 / c, root)


def trace_constraint_costs(F, Sigma, v: float) -> np.ndarray:
    """Costs turning ``tr(Sigma M(w)) = v`` into ``sum c w = 1``."""
    Sigma = np.asarray(Sigma, dtype=float)
    if Sigma.ndim != 2 or Sigma.shape[0] != Sigma.shape[1]:
        raise InvalidInstanceError("Sigma must be a square matrix")
    if not np.allclose(Sigma, Sigma.T):
        raise InvalidInstanceError("Sigma must be symmetric")
    try:
        np.linalg.cholesky(Sigma)
    except np.linalg.LinAlgError:
        raise InvalidInstanceError("Sigma must be positive definite") from None
    if not v > 0:
        raise InvalidInstanceError("trace value v must be positive")
    F = np.asarray(F, dtype=float)
    return np.einsum("ij,jk,ik->i", F, Sigma, F) / v


def classify_regime(part: CostPartition) -> Regime:
    if part.n_plus == 0:
        return Regime.ALL_LOW
    if part.n_minus == 0:
        return Regime.ALL_HIGH
    return Regime.MIXED
