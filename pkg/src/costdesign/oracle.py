"""Reference solutions used to cross-check the barycentric solver.

Nothing here is tuned for speed.  The Frank-Wolfe method works directly on
the list of polytope vertices, so it is limited to small problems.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .model import (CostPartition, DesignInstance, SingularDesignError,
                    _cholesky, information_matrix, quad_forms)

MAX_VERTICES = 10**6

INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class VertexKind(enum.Enum):
    PAIR = "pair"
    SINGLETON = "singleton"


class ExtremePoint(NamedTuple):
    kind: VertexKind
    points: tuple          # (x+, x-) for pairs, (x0,) for singletons
    vector: np.ndarray


def extreme_points(part: CostPartition) -> list:
    """All vertices of the polytope ``{w >= 0: sum w = 1, sum c w = 1}``.

    Pairs come first in row-major ``(x+, x-)`` order, then the unit-cost
    singletons; there are ``n_plus * n_minus + n_zero`` of them.
    """
    out = []
    for xp, dp in zip(part.plus, part.delta_plus):
        for xm, dm in zip(part.minus, part.delta_minus):
            v = np.zeros(part.n)
            v[xp] = dm / (dp + dm)
            v[xm] = dp / (dp + dm)
            out.append(ExtremePoint(VertexKind.PAIR, (int(xp), int(xm)), v))
    for x0 in part.zero:
        v = np.zeros(part.n)
        v[x0] = 1.0
        out.append(ExtremePoint(VertexKind.SINGLETON, (int(x0),), v))
    return out


def example1_solution(c1: float, c2: float,
                      mode: str = "inequality") -> Optional[np.ndarray]:
    """Closed-form optimum for ``f(1) = (1, 0)``, ``f(2) = (1, 1)``.

    Here ``det M(w) = w1 w2``.  In ``"inequality"`` mode the branches are
    tested in order: size-only optimum when ``c1 + c2 <= 2``, cost-only
    optimum when ``1/(2 c1) + 1/(2 c2) <= 1``, otherwise the unique point
    meeting both constraints with equality.  ``"equality"`` mode returns
    ``None`` where that problem has no nonsingular feasible design.
    """
    if c1 <= 0 or c2 <= 0:
        raise ValueError("costs must be positive")

    def both_tight():
        return np.array([(c2 - 1) / (c2 - c1), (c1 - 1) / (c1 - c2)])

    if mode == "inequality":
        if c1 + c2 <= 2:
            return np.array([0.5, 0.5])
        if 1 / (2 * c1) + 1 / (2 * c2) <= 1:
            return np.array([1 / (2 * c1), 1 / (2 * c2)])
        return both_tight()
    if mode == "equality":
        if c1 == 1 and c2 == 1:
            return np.array([0.5, 0.5])
        if c1 == c2:
            return None
        w = both_tight()
        return w if np.all(w > 0) else None
    raise ValueError(f"unknown mode {mode!r}")


def golden_section_max(fun, lo: float, hi: float, tol: float = 1e-12):
    """Maximize a unimodal scalar function on ``[lo, hi]``."""
    a, b = lo, hi
    x1 = b - INV_GOLDEN * (b - a)
    x2 = a + INV_GOLDEN * (b - a)
    f1, f2 = fun(x1), fun(x2)
    while b - a > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_GOLDEN * (b - a)
            f2 = fun(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_GOLDEN * (b - a)
            f1 = fun(x1)
    return (x1, f1) if f1 >= f2 else (x2, f2)


@dataclass
class FrankWolfeResult:
    w: np.ndarray
    #: Weight of every vertex, in :func:`extreme_points` order.
    vertex_weights: np.ndarray
    logdet: list = field(default_factory=list)
    gap: float = math.inf
    iterations: int = 0
    m: int = 0

    @property
    def eff_lb(self) -> float:
        return self.m / (self.m + max(self.gap, 0.0))


def cost_only_vertices(costs) -> np.ndarray:
    """Vertices ``e_x / c_x`` of ``{w >= 0: sum c w = 1}``, one per row."""
    c = np.asarray(costs, dtype=float)
    return np.diag(1.0 / c)


def two_constraint_vertices(c1, c2, tol: float = 0.0) -> np.ndarray:
    """Vertices of ``{w >= 0: c1 . w = 1, c2 . w = 1}``, one per row.

    A vertex has at most two nonzero weights: a single point with
    ``c1 = c2`` (within ``tol``), or a pair on opposite sides of
    ``c1 = c2`` solving the 2x2 system.  Pairs come first in row-major
    order.
    """
    c1 = np.asarray(c1, dtype=float)
    c2 = np.asarray(c2, dtype=float)
    n = len(c1)
    r = c2 / c1
    above = np.flatnonzero(r > 1 + tol)
    below = np.flatnonzero(r < 1 - tol)
    level = np.flatnonzero(np.abs(r - 1) <= tol)
    rows = []
    for i in above:
        for j in below:
            det = c1[i] * c2[j] - c1[j] * c2[i]
            v = np.zeros(n)
            v[i] = (c2[j] - c1[j]) / det
            v[j] = (c1[i] - c2[i]) / det
            rows.append(v)
    for k in level:
        v = np.zeros(n)
        v[k] = 1.0 / c1[k]
        rows.append(v)
    return np.array(rows).reshape(len(rows), n)


def frank_wolfe_vertices(F, V, iterations: int, away_steps: bool = True,
                         gap_tol: float = 0.0,
                         line_tol: float = 1e-12) -> FrankWolfeResult:
    """Vertex-direction method over the convex hull of the rows of ``V``.

    Starts at the barycenter of the vertices.  Each step scans every
    vertex ``q`` for the largest ``q . d(w)`` and moves towards it with a
    golden-section line search on ``log det``.  With ``away_steps`` the
    method may instead move away from the worst vertex currently in use,
    which lets vertex weights reach exactly zero.  Stops after
    ``iterations`` steps or once the gap ``max q.d - m`` is at most
    ``gap_tol``.
    """
    F = np.asarray(F, dtype=float)
    V = np.asarray(V, dtype=float)
    nt = V.shape[0]
    if nt == 0 or nt > MAX_VERTICES:
        raise ValueError(f"vertex count {nt} outside (0, {MAX_VERTICES}]")
    m = F.shape[1]
    lam = np.full(nt, 1.0 / nt)
    w = lam @ V
    M = information_matrix(F, w)
    L = _cholesky(M)
    if L is None:
        raise SingularDesignError("barycenter has a singular information matrix")
    res = FrankWolfeResult(w=w, vertex_weights=lam, m=m)
    logdet = 2.0 * float(np.sum(np.log(np.diag(L))))
    res.logdet.append(logdet)

    k = 0
    while True:
        d = quad_forms(L, F)
        scores = V @ d
        s = int(np.argmax(scores))
        res.gap = float(scores[s]) - m
        if k >= iterations or res.gap <= gap_tol:
            break
        in_use = np.flatnonzero(lam > 0)
        v = int(in_use[np.argmin(scores[in_use])])
        away_gap = m - float(scores[v])
        if away_steps and away_gap > res.gap and lam[v] < 1.0:
            direction = w - V[v]
            alpha_max = lam[v] / (1.0 - lam[v])
            toward = False
        else:
            direction = V[s] - w
            alpha_max = 1.0
            toward = True

        # log det(M + a D) - log det M = sum log(1 + a mu)
        Z = np.linalg.solve(L, F.T)
        A = (Z * direction) @ Z.T
        mu = np.linalg.eigvalsh(0.5 * (A + A.T)).tolist()

        def gain(a, mu=mu):
            total = 0.0
            for x in mu:
                y = 1.0 + a * x
                if y <= 0.0:
                    return -math.inf
                total += math.log(y)
            return total

        alpha, g = golden_section_max(gain, 0.0, alpha_max, line_tol)
        if alpha_max - alpha <= 10 * line_tol and gain(alpha_max) >= g:
            alpha, g = alpha_max, gain(alpha_max)
        if not g > 0.0:
            alpha = 0.0
        if alpha > 0.0:
            saved = lam.copy()
            if toward:
                lam *= 1.0 - alpha
                lam[s] += alpha
            else:
                lam *= 1.0 + alpha
                lam[v] -= alpha
                if alpha == alpha_max:
                    lam[v] = 0.0
            lam = np.clip(lam, 0.0, None)
            lam /= lam.sum()
            w_new = lam @ V
            L_new = _cholesky(information_matrix(F, w_new))
            new_logdet = (2.0 * float(np.sum(np.log(np.diag(L_new))))
                          if L_new is not None else -math.inf)
            if new_logdet >= logdet:
                w, L, logdet = w_new, L_new, new_logdet
            else:
                # gain lost to round-off: the precision floor is reached
                lam, alpha = saved, 0.0
        res.logdet.append(logdet)
        k += 1
        if alpha == 0.0:
            break

    res.w, res.vertex_weights, res.iterations = w, lam, k
    return res


def frank_wolfe_reference(instance: DesignInstance, part: CostPartition,
                          iterations: int, away_steps: bool = True,
                          gap_tol: float = 0.0,
                          line_tol: float = 1e-12) -> FrankWolfeResult:
    """Vertex-direction method over the size-and-cost polytope.

    Runs :func:`frank_wolfe_vertices` on the vertices listed by
    :func:`extreme_points`.
    """
    nt = part.n_tilde
    if nt == 0 or nt > MAX_VERTICES:
        raise ValueError(f"vertex count {nt} outside (0, {MAX_VERTICES}]")
    V = np.array([e.vector for e in extreme_points(part)])
    return frank_wolfe_vertices(instance.F, V, iterations, away_steps,
                                gap_tol, line_tol)
