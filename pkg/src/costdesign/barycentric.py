"""Barycentric multiplicative algorithm for size-and-cost constrained designs.

The feasible set of the equality problem

    max phi(w)  s.t.  w >= 0,  sum(w) = 1,  sum(c * w) = 1

is a polytope whose vertices are the pair vectors ``q(x+, x-)`` mixing one
high-cost and one low-cost point, and the unit vectors of unit-cost points.
The algorithm multiplies each weight by a ratio built from the pairwise
weighted variances, which keeps the iterates inside the polytope and never
decreases ``det M(w)``.  The same weighted variances give an efficiency
lower bound and a rule for discarding points that cannot be in the support
of any optimal design.
"""
from __future__ import annotations

import enum
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from .model import (TOL_FEAS, CostPartition, DesignInstance,
                    SingularDesignError, _factor_logdet, feasibility_residuals,
                    h_threshold, info_matrix,
                    iter_weighted_variance_blocks, pair_kernel, partition,
                    quad_forms, s_of, variance_function, weighted_variances)
from .standard import StandardOptions, solve_standard_multiplicative
from .transforms import Regime, classify_regime, cost_only_to_standard

__all__ = [
    "EmptyStratumError", "ZeroSError", "InfeasibleRenormalizationError",
    "Status", "SolverOptions", "SolverReport", "TraceRow", "Snapshot",
    "IterationInfo", "EquivalenceResult", "initial_design",
    "barycentric_update", "barycentric_coordinates", "epsilon_and_bounds",
    "equivalence_check", "h_threshold", "delete_redundant", "renormalize",
    "mix_to_equality", "solve_equality", "solve_inequality",
    "solve_size_only", "solve_cost_only", "Certificate", "certify",
]

log = logging.getLogger(__name__)

FEAS_CHECK_EVERY = 16


class EmptyStratumError(ValueError):
    """The high-cost or the low-cost stratum is empty."""


class ZeroSError(ValueError):
    """The design carries no weight on high- and low-cost points."""


class InfeasibleRenormalizationError(ValueError):
    """Both equality constraints cannot be restored by stratum scaling."""


class Status(enum.Enum):
    CONVERGED = "Converged"
    MAX_ITERS = "MaxIters"
    COLLAPSED = "CollapsedToX0"
    SHORTCUT_SIZE = "ShortcutSize"
    SHORTCUT_COST = "ShortcutCost"

    @property
    def ok(self) -> bool:
        return self is not Status.MAX_ITERS


@dataclass(frozen=True)
class SolverOptions:
    """Settings of the barycentric solver.

    ``deletion_interval=None`` disables the deletion rule.  ``milestones``
    lists efficiency levels at which a copy of the design is kept in the
    report.  ``block_rows`` caps the number of weighted-variance rows held
    in memory at once.
    """

    target_eff: float = 0.99999
    deletion_interval: Optional[int] = 16
    max_iters: int = 200_000
    tol_one: float = 0.0
    tol_feas: float = TOL_FEAS
    cost_bump: float = 0.0
    seed: int = 0
    fallback: bool = False
    check_lemma: bool = True
    trace_interval: int = 16
    milestones: tuple = ()
    block_rows: Optional[int] = None
    callback: Optional[Callable[["IterationInfo"], None]] = None

    def __post_init__(self):
        if not 0.0 < self.target_eff < 1.0:
            raise ValueError("target_eff must lie in (0, 1)")
        if self.deletion_interval is not None and self.deletion_interval < 1:
            raise ValueError("deletion_interval must be positive or None")
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")
        if self.tol_one < 0 or self.tol_feas < 0 or self.cost_bump < 0:
            raise ValueError("tolerances and cost_bump must be nonnegative")
        if self.trace_interval < 1:
            raise ValueError("trace_interval must be positive")


class TraceRow(NamedTuple):
    iteration: int
    phi: float
    eff_lb: float
    active: int
    elapsed: float


@dataclass
class Snapshot:
    """Design captured when the efficiency bound first reached ``level``."""

    level: float
    iteration: int
    eff_lb: float
    active: int
    elapsed: float
    w: np.ndarray
    active_mask: np.ndarray


@dataclass
class IterationInfo:
    """Per-evaluation state handed to ``SolverOptions.callback``.

    ``event`` is ``"evaluate"`` for a regular evaluation and ``"deletion"``
    right after points were removed and the design renormalized.
    """

    iteration: int
    event: str
    w: np.ndarray
    logdet: float
    eff_lb: float
    s: float
    active: int


@dataclass
class SolverReport:
    ids: tuple
    w: np.ndarray
    phi: float
    eff_lb: float
    iterations: int
    status: Status
    deletions: list = field(default_factory=list)
    trace: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    #: Smallest ``S(w)`` seen over the run (``nan`` when not applicable).
    min_s: float = math.nan
    #: First iteration at which ``phi`` exceeded the unit-cost optimum.
    lemma_iteration: Optional[int] = None
    elapsed: float = 0.0

    @property
    def deleted(self) -> np.ndarray:
        """Indices removed by the deletion rule."""
        lookup = {x: i for i, x in enumerate(self.ids)}
        out = [lookup[x] for _, removed in self.deletions for x in removed]
        return np.array(sorted(out), dtype=int)


class EquivalenceResult(NamedTuple):
    optimal: bool
    slack_zero: float
    slack_pm: float


# ---------------------------------------------------------------------------
# building blocks


def _require_pairs(part: CostPartition):
    if part.n_plus == 0 or part.n_minus == 0:
        raise EmptyStratumError(
            f"need high- and low-cost points, got n+={part.n_plus}, "
            f"n-={part.n_minus}")


def initial_design(part: CostPartition) -> np.ndarray:
    """Barycenter of the vertices of the feasible polytope.

    Every vertex gets weight ``1 / n_tilde``; the result is strictly
    positive and satisfies both equality constraints.
    """
    _require_pairs(part)
    R = 1.0 / (part.delta_plus[:, None] + part.delta_minus[None, :])
    nt = part.n_tilde
    w = np.zeros(part.n)
    w[part.plus] = (R @ part.delta_minus) / nt
    w[part.minus] = (part.delta_plus @ R) / nt
    w[part.zero] = 1.0 / nt
    return w


def barycentric_coordinates(w, part: CostPartition):
    """Weights of ``w`` on the polytope vertices.

    Returns the ``n_plus x n_minus`` matrix of pair coordinates
    ``(delta+ + delta-) w+ w- / S(w)`` and the unit-cost coordinates
    ``w0``.  Both are zero-safe when ``S(w) = 0``.
    """
    w = np.asarray(w, dtype=float)
    s = s_of(w, part)
    if s > 0:
        pair = ((part.delta_plus[:, None] + part.delta_minus[None, :])
                * np.outer(w[part.plus], w[part.minus]) / s)
    else:
        pair = np.zeros((part.n_plus, part.n_minus))
    return pair, w[part.zero].copy()


def vertex_matrix(part: CostPartition) -> np.ndarray:
    """Rows are the pair vertices (row-major over ``plus x minus``) then unit vertices."""
    dp = part.delta_plus[:, None]
    dm = part.delta_minus[None, :]
    rows = np.zeros((part.n_tilde, part.n))
    k = np.arange(part.n_plus * part.n_minus)
    ip, im = np.divmod(k, part.n_minus)
    rows[k, part.plus[ip]] = (dm / (dp + dm)).ravel()
    rows[k, part.minus[im]] = (dp / (dp + dm)).ravel()
    rows[len(k) + np.arange(part.n_zero), part.zero] = 1.0
    return rows


def _update_from_variances(w, part, d, m):
    _require_pairs(part)
    u_plus = w[part.plus] * part.delta_plus
    u_minus = w[part.minus] * part.delta_minus
    s = float(u_plus.sum())
    if not s > 0:
        raise ZeroSError("S(w) = 0; restrict the problem to unit-cost points")
    Delta = weighted_variances(part, d)
    out = np.zeros_like(w)
    out[part.plus] = w[part.plus] * (Delta @ u_minus) / (m * s)
    out[part.minus] = w[part.minus] * (u_plus @ Delta) / (m * s)
    out[part.zero] = w[part.zero] * d[part.zero] / m
    return out


def barycentric_update(instance: DesignInstance, part: CostPartition,
                       w) -> np.ndarray:
    """One step ``w <- w * d_pi(w)`` of the barycentric algorithm.

    High-cost weights are multiplied by
    ``sum_- w- delta- Dtilde[+, -] / (m S)``, low-cost weights by the
    transposed sum, and unit-cost weights by ``d / m``.
    """
    w = np.asarray(w, dtype=float)
    state = info_matrix(instance, w)
    d = variance_function(instance, state)
    return _update_from_variances(w, part, d, instance.m)


def epsilon_and_bounds(part: CostPartition, Delta, d0, m: int):
    """Efficiency gap ``eps`` and the bound ``m / (m + eps)``.

    ``eps`` is the largest weighted variance (or unit-cost variance) minus
    ``m``, clamped at zero.
    """
    top = -np.inf
    Delta = np.asarray(Delta, dtype=float)
    d0 = np.asarray(d0, dtype=float)
    if Delta.size:
        top = max(top, float(Delta.max()))
    if d0.size:
        top = max(top, float(d0.max()))
    if not np.isfinite(top):
        raise ValueError("no weighted variances to bound")
    eps = max(top - m, 0.0)
    return eps, m / (m + eps)


def equivalence_check(part: CostPartition, d, m: int,
                      tol: float = 0.0) -> EquivalenceResult:
    """Optimality test for a feasible nonsingular design.

    Optimal iff ``max d0 <= m`` and
    ``max (d+ - m)/delta+ + max (d- - m)/delta- <= 0``, both up to ``tol``.
    Empty strata contribute ``-inf``.
    """
    d = np.asarray(d, dtype=float)
    slack_zero = float(d[part.zero].max() - m) if part.n_zero else -np.inf
    if part.n_plus and part.n_minus:
        slack_pm = float(np.max((d[part.plus] - m) / part.delta_plus)
                         + np.max((d[part.minus] - m) / part.delta_minus))
    else:
        slack_pm = -np.inf
    return EquivalenceResult(slack_zero <= tol and slack_pm <= tol,
                             slack_zero, slack_pm)


def delete_redundant(part: CostPartition, Delta, d0, epsilon: float,
                     m: int) -> np.ndarray:
    """Indices that no optimal design can support.

    A high-cost point goes when every entry of its row of ``Delta`` is below
    ``h_m(epsilon)``, a low-cost point when its whole column is, and a
    unit-cost point when its variance is.
    """
    Delta = np.asarray(Delta, dtype=float)
    d0 = np.asarray(d0, dtype=float)
    h = h_threshold(m, epsilon)
    out = []
    if Delta.size:
        out.append(part.plus[Delta.max(axis=1) < h])
        out.append(part.minus[Delta.max(axis=0) < h])
    out.append(part.zero[d0 < h])
    return np.sort(np.concatenate(out)).astype(int)


def renormalize(w, part: CostPartition) -> np.ndarray:
    """Rescale each stratum so that both equality constraints hold again.

    When all three strata carry weight, the unit-cost stratum is scaled by
    ``1/sum(w)`` and the high/low factors keep the split between unit-cost
    and other points unchanged.
    """
    w = np.array(w, dtype=float)
    s = float(w.sum())
    s_plus = float(w[part.plus].sum())
    s_minus = float(w[part.minus].sum())
    s_zero = float(w[part.zero].sum())
    sd_plus = float(np.dot(part.delta_plus, w[part.plus]))
    sd_minus = float(np.dot(part.delta_minus, w[part.minus]))
    if s <= 0:
        raise InfeasibleRenormalizationError("design has no weight")
    if s_plus > 0 and s_minus > 0:
        denom = s_plus * sd_minus + s_minus * sd_plus
        if s_zero > 0:
            h_plus = sd_minus * (s_plus + s_minus) / (s * denom)
            h_minus = sd_plus * (s_plus + s_minus) / (s * denom)
            h_zero = 1.0 / s
        else:
            h_plus, h_minus, h_zero = sd_minus / denom, sd_plus / denom, 1.0
    elif s_plus == 0 and s_minus == 0:
        h_plus, h_minus, h_zero = 1.0, 1.0, 1.0 / s_zero
    else:
        raise InfeasibleRenormalizationError(
            "weight on only one of the high- and low-cost strata")
    w[part.plus] *= h_plus
    w[part.minus] *= h_minus
    w[part.zero] *= h_zero
    return w


def mix_to_equality(w_star, w_s, instance: DesignInstance,
                    tol: float = TOL_FEAS) -> np.ndarray:
    """Move a size-tight optimum onto the cost equality.

    ``w_star`` spends at most the budget (``alpha <= 1``) and the size-only
    optimum ``w_s`` overspends it (``beta > 1``); the mixture
    ``gamma w_star + (1 - gamma) w_s`` with ``gamma = (beta-1)/(beta-alpha)``
    meets both constraints with equality.  Inputs that are only
    approximately feasible give an approximately feasible mixture, which is
    then renormalized onto the constraints.
    """
    w_star = np.asarray(w_star, dtype=float)
    w_s = np.asarray(w_s, dtype=float)
    c = instance.costs
    alpha = float(c @ w_star)
    beta = float(c @ w_s)
    if abs(w_star.sum() - 1) > tol or abs(w_s.sum() - 1) > tol:
        raise ValueError("both designs must have unit size")
    if not alpha <= 1 + tol or not beta > 1:
        raise ValueError(
            f"need cost(w_star) <= 1 < cost(w_s), got {alpha:.6g}, {beta:.6g}")
    gamma = min(1.0, (beta - 1) / (beta - alpha))
    w = gamma * w_star + (1 - gamma) * w_s
    if max(feasibility_residuals(w, instance)) > tol * 1e-3:
        part = partition(instance)
        try:
            w = renormalize(w, part)
        except InfeasibleRenormalizationError:
            pass
    return w


# ---------------------------------------------------------------------------
# solver


def _restrict(part: CostPartition, keep: np.ndarray) -> CostPartition:
    kp = keep[part.plus]
    km = keep[part.minus]
    return CostPartition(plus=part.plus[kp], minus=part.minus[km],
                         zero=part.zero[keep[part.zero]],
                         delta_plus=part.delta_plus[kp],
                         delta_minus=part.delta_minus[km], n=part.n)


class _Evaluation(NamedTuple):
    logdet: float
    phi: float
    d_zero: np.ndarray
    factor: np.ndarray      # multiplicative update, compact order
    top: float              # max over Delta and d_zero
    row_max: Optional[np.ndarray]
    col_max: Optional[np.ndarray]
    s: float


class _Workspace:
    """Per-active-set caches for the pairwise computations.

    Holds the active weights ``wa`` compactly, ordered high, low, unit;
    :meth:`store` writes them back into a full-length design.
    """

    def __init__(self, instance: DesignInstance, part: CostPartition,
                 block_rows: Optional[int], w: np.ndarray):
        self.part = part
        self.m = instance.m
        self.index = np.concatenate([part.plus, part.minus, part.zero])
        self.F = instance.F[self.index]
        self.Ft = np.ascontiguousarray(self.F.T)
        self.costs = instance.costs[self.index]
        self.np_, self.nm = part.n_plus, part.n_minus
        self.npm = self.np_ + self.nm
        self.delta = np.concatenate([part.delta_plus, part.delta_minus])
        self.inv_delta = 1.0 / self.delta
        rows = self.np_ if block_rows is None else max(1, min(block_rows, self.np_))
        self.blocks = [slice(i, min(i + rows, self.np_))
                       for i in range(0, self.np_, rows)] if self.np_ else []
        if len(self.blocks) == 1:
            self.kernels = [pair_kernel(part.delta_plus, part.delta_minus)]
        else:
            self.kernels = None
        self.buf = np.empty((rows, self.nm)) if self.np_ and self.nm else None
        self.wa = w[self.index]

    def kernel(self, k, rows):
        if self.kernels is not None:
            return self.kernels[k]
        return pair_kernel(self.part.delta_plus[rows], self.part.delta_minus)

    def store(self, w: np.ndarray) -> np.ndarray:
        w[self.index] = self.wa
        return w

    def residual(self) -> float:
        wa = self.wa
        return max(abs(float(wa.sum()) - 1.0),
                   abs(float(self.costs @ wa) - 1.0))

    def evaluate(self, need_extremes: bool) -> Optional[_Evaluation]:
        wa, np_, npm = self.wa, self.np_, self.npm
        factor = _factor_logdet((self.Ft * wa) @ self.F)
        if factor is None:
            return None
        L, logdet = factor
        d = quad_forms(L, self.F)
        d_zero = d[npm:]
        u = wa[:npm] * self.delta
        ab = d[:npm] * self.inv_delta
        a, b = ab[:np_], ab[np_:]
        u_plus, u_minus = u[:np_], u[np_:]
        g = np.empty(len(wa))
        r_minus = g[np_:npm]
        top = float(d_zero.max()) if len(d_zero) else -np.inf
        row_max = np.empty(np_) if need_extremes else None
        col_max = np.full(self.nm, -np.inf) if need_extremes else None
        for k, rows in enumerate(self.blocks):
            buf = self.buf[: rows.stop - rows.start]
            np.add(a[rows, None], b[None, :], out=buf)
            buf *= self.kernel(k, rows)
            g[rows] = buf @ u_minus
            if k == 0:
                r_minus[:] = u_plus[rows] @ buf
            else:
                r_minus += u_plus[rows] @ buf
            if need_extremes:
                row_max[rows] = buf.max(axis=1)
                np.maximum(col_max, buf.max(axis=0), out=col_max)
                top = max(top, float(row_max[rows].max()))
            else:
                top = max(top, float(buf.max()))
        s = float(u_plus.sum())
        g[:npm] /= self.m * s
        np.divide(d_zero, self.m, out=g[npm:])
        return _Evaluation(logdet, math.exp(logdet / self.m), d_zero, g, top,
                           row_max, col_max, s)

    def update(self, ev: _Evaluation) -> None:
        self.wa *= ev.factor


def _prepare(instance: DesignInstance, opts: SolverOptions):
    if opts.cost_bump > 0:
        part = partition(instance, opts.tol_one)
        costs = np.array(instance.costs)
        costs[part.zero] = 1.0 + opts.cost_bump
        instance = instance.with_costs(costs)
    part = partition(instance, opts.tol_one)
    return instance, part


def _collapse(instance, part_active, opts, t, t0, report_kw, reason):
    log.info("collapsing to unit-cost points: %s", reason)
    if part_active.n_zero == 0:
        raise EmptyStratumError(
            "no unit-cost points left to carry the design")
    res = solve_standard_multiplicative(
        instance, StandardOptions(target_eff=opts.target_eff,
                                  max_iters=max(opts.max_iters - t, 0),
                                  restrict_to=part_active.zero,
                                  deletion_interval=opts.deletion_interval))
    status = Status.COLLAPSED if res.eff_lb >= opts.target_eff else Status.MAX_ITERS
    st = info_matrix(instance, res.w)
    report = SolverReport(ids=instance.ids, w=res.w, phi=st.phi,
                          eff_lb=res.eff_lb, iterations=t + res.iterations,
                          status=status, **report_kw)
    report.trace.append(TraceRow(report.iterations, st.phi, res.eff_lb,
                                 int(np.count_nonzero(res.w)),
                                 time.perf_counter() - t0))
    report.warnings.append(reason)
    report.elapsed = time.perf_counter() - t0
    return report


def _unit_cost_optimum_check(instance, part, phi_value):
    """Compare ``phi_value`` with the unit-cost optimum ``v0``.

    One early-stopping standard solve on the unit-cost points.  Returns
    ``(verdict, bound)``: ``verdict`` is True when ``phi_value > v0``,
    False when not, None when undecided (ties); ``bound`` is a certified
    upper bound on ``v0``, refined to efficiency ``1 - 1e-4`` unless the
    verdict is True.
    """
    if part.n_zero == 0:
        return True, 0.0
    if np.linalg.matrix_rank(instance.F[part.zero]) < instance.m:
        return True, 0.0
    verdict = {}

    def stop(phi_z, eff):
        if "v" not in verdict:
            if phi_z / eff < phi_value:
                verdict["v"] = True
                return True
            if phi_z < phi_value:
                return False
            verdict["v"] = False
        return eff >= 1 - 1e-4

    res = solve_standard_multiplicative(
        instance, StandardOptions(target_eff=1 - 1e-12, max_iters=100_000,
                                  restrict_to=part.zero, deletion_interval=16),
        stop_when=stop)
    return verdict.get("v"), res.phi / res.eff_lb


def solve_equality(instance: DesignInstance,
                   opts: SolverOptions = SolverOptions()) -> SolverReport:
    """D-optimal design under ``sum(w) = 1`` and ``sum(c w) = 1``.

    Starts from the polytope barycenter and applies barycentric updates.
    The efficiency bound is checked at every iteration; every
    ``opts.deletion_interval`` iterations provably redundant points are
    removed and the design is renormalized.  If deletion empties the
    high- or low-cost stratum, the remaining problem is a standard one on
    the unit-cost points and is solved as such.

    Returns a :class:`SolverReport` over the ids of ``instance``.
    """
    t0 = time.perf_counter()
    instance, part = _prepare(instance, opts)
    m = instance.m
    report_kw = dict(deletions=[], trace=[], snapshots=[], warnings=[])

    regime = classify_regime(part)
    if regime is not Regime.MIXED:
        if not opts.fallback:
            raise EmptyStratumError(
                f"equality problem needs high- and low-cost points "
                f"(regime {regime.value})")
        return _collapse(instance, part, opts, 0, t0, report_kw,
                         f"regime {regime.value}: only unit-cost points can "
                         f"meet both equalities")

    w = initial_design(part)
    active = np.ones(instance.n, dtype=bool)
    ws = _Workspace(instance, part, opts.block_rows, w)
    lemma_iteration = None
    v0_pending = opts.check_lemma and part.n_zero > 0
    v0 = None
    min_s = math.inf
    milestones = sorted(opts.milestones)
    next_ms = 0
    interval = opts.deletion_interval
    t = 0
    last_deletion = -1
    last_trace = -1
    ev = None

    def trace_row(ev_):
        return TraceRow(t, ev_.phi, eff, int(active.sum()),
                        time.perf_counter() - t0)

    while True:
        deletion_due = (interval is not None and t % interval == 0
                        and t != last_deletion)
        ev = ws.evaluate(need_extremes=deletion_due)
        if ev is None:
            raise SingularDesignError(
                f"information matrix became singular at iteration {t}")
        eps = max(ev.top - m, 0.0)
        eff = m / (m + eps)
        min_s = min(min_s, ev.s)

        if v0_pending and v0 is None:
            verdict, bound = _unit_cost_optimum_check(instance, part, ev.phi)
            if verdict:
                lemma_iteration = 0
                v0_pending = False
            else:
                v0 = bound
                report_kw["warnings"].append(
                    f"initial design has phi={ev.phi:.6g} <= v0~{v0:.6g}; "
                    "convergence is not guaranteed (consider cost_bump)")
                if ev.phi > v0:
                    lemma_iteration = t
                    v0_pending = False
        elif v0_pending and v0 is not None and ev.phi > v0:
            lemma_iteration = t
            v0_pending = False

        if opts.callback is not None:
            opts.callback(IterationInfo(t, "evaluate", ws.store(w).copy(),
                                        ev.logdet, eff, ev.s,
                                        int(active.sum())))
        while next_ms < len(milestones) and eff >= milestones[next_ms]:
            report_kw["snapshots"].append(Snapshot(
                milestones[next_ms], t, eff, int(active.sum()),
                time.perf_counter() - t0, ws.store(w).copy(),
                active.copy()))
            next_ms += 1

        done = eff >= opts.target_eff or t >= opts.max_iters
        if done or t % opts.trace_interval == 0:
            if t != last_trace:
                report_kw["trace"].append(trace_row(ev))
                last_trace = t
        if done:
            ws.store(w)
            status = (Status.CONVERGED if eff >= opts.target_eff
                      else Status.MAX_ITERS)
            break

        if deletion_due:
            last_deletion = t
            ap = ws.part
            h = h_threshold(m, eps)
            drop = np.concatenate([ap.plus[ev.row_max < h],
                                   ap.minus[ev.col_max < h],
                                   ap.zero[ev.d_zero < h]])
            if len(drop):
                ws.store(w)
                active[drop] = False
                w[drop] = 0.0
                report_kw["deletions"].append(
                    (t, tuple(instance.ids[i] for i in np.sort(drop))))
                new_part = _restrict(part, active)
                if new_part.n_plus == 0 or new_part.n_minus == 0:
                    report_kw["min_s"] = min_s
                    report_kw["lemma_iteration"] = lemma_iteration
                    return _collapse(
                        instance, new_part, opts, t, t0, report_kw,
                        "deletion emptied the high- or low-cost stratum; "
                        "optimal designs live on unit-cost points")
                w = renormalize(w, new_part)
                ws = _Workspace(instance, new_part, opts.block_rows, w)
                if opts.callback is not None:
                    st = info_matrix(instance, w)
                    opts.callback(IterationInfo(
                        t, "deletion", w.copy(), st.logdet, math.nan,
                        s_of(w, new_part), int(active.sum())))
                continue

        ws.update(ev)
        # drift is ~1e-16 per update; checking every FEAS_CHECK_EVERY suffices
        if t % FEAS_CHECK_EVERY == 0 and ws.residual() > opts.tol_feas:
            w = renormalize(ws.store(w), ws.part)
            ws.wa = w[ws.index]
        t += 1

    report = SolverReport(ids=instance.ids, w=w, phi=ev.phi, eff_lb=eff,
                          iterations=t, status=status, min_s=min_s,
                          lemma_iteration=lemma_iteration, **report_kw)
    report.elapsed = time.perf_counter() - t0
    return report


def _standard_report(instance, res, status, t0, target, back=None):
    w = res.w if back is None else back(res.w)
    st = info_matrix(instance, w)
    if res.eff_lb < target:
        status = Status.MAX_ITERS
    return SolverReport(
        ids=instance.ids, w=w, phi=st.phi, eff_lb=res.eff_lb,
        iterations=res.iterations, status=status,
        trace=[TraceRow(res.iterations, st.phi, res.eff_lb,
                        int(np.count_nonzero(w)), time.perf_counter() - t0)],
        elapsed=time.perf_counter() - t0)


def _standard_options(opts: SolverOptions) -> StandardOptions:
    return StandardOptions(target_eff=opts.target_eff,
                           max_iters=opts.max_iters,
                           deletion_interval=opts.deletion_interval)


def solve_size_only(instance: DesignInstance,
                    opts: SolverOptions = SolverOptions()) -> SolverReport:
    """D-optimal design under ``sum(w) = 1`` alone, ignoring costs.

    ``eff_lb`` refers to the size-only problem.
    """
    t0 = time.perf_counter()
    res = solve_standard_multiplicative(instance, _standard_options(opts))
    return _standard_report(instance, res, Status.SHORTCUT_SIZE, t0,
                            opts.target_eff)


def solve_cost_only(instance: DesignInstance,
                    opts: SolverOptions = SolverOptions()) -> SolverReport:
    """D-optimal design under ``sum(c w) = 1`` alone, ignoring size.

    ``eff_lb`` refers to the cost-only problem.
    """
    t0 = time.perf_counter()
    std, back = cost_only_to_standard(instance)
    res = solve_standard_multiplicative(std, _standard_options(opts))
    return _standard_report(instance, res, Status.SHORTCUT_COST, t0,
                            opts.target_eff, back)


def solve_inequality(instance: DesignInstance,
                     opts: SolverOptions = SolverOptions()) -> SolverReport:
    """D-optimal design under ``sum(w) <= 1`` and ``sum(c w) <= 1``.

    Tries the size-only optimum, then the cost-only optimum, and falls back
    to the equality problem when neither satisfies the other constraint.
    """
    t0 = time.perf_counter()
    part = partition(instance, opts.tol_one)
    regime = classify_regime(part)
    c = instance.costs

    if regime is not Regime.ALL_HIGH:
        size = solve_size_only(instance, opts)
        if regime is Regime.ALL_LOW or float(c @ size.w) <= 1.0:
            size.elapsed = time.perf_counter() - t0
            return size

    cost = solve_cost_only(instance, opts)
    if regime is Regime.ALL_HIGH or float(cost.w.sum()) <= 1.0:
        cost.elapsed = time.perf_counter() - t0
        return cost

    report = solve_equality(instance, opts)
    report.elapsed = time.perf_counter() - t0
    return report


class Certificate(NamedTuple):
    """Optimality evidence for a design of the equality problem."""

    size_residual: float
    cost_residual: float
    slack_zero: float
    slack_pm: float
    epsilon: float
    eff_lb: float
    feasible: bool
    optimal: bool


def certify(instance: DesignInstance, w, tol: float = 0.0,
            tol_feas: float = TOL_FEAS, tol_one: float = 0.0,
            block_rows: int = 1024) -> Certificate:
    """Feasibility residuals, equivalence slacks and efficiency bound of ``w``.

    ``optimal`` holds when ``w`` is feasible within ``tol_feas`` and
    :func:`equivalence_check` passes at ``tol``.  Residuals are signed
    (``sum w - 1`` and ``sum c w - 1``).

    Raises
    ------
    SingularDesignError
        If ``M(w)`` is singular.
    """
    w = np.asarray(w, dtype=float)
    part = partition(instance, tol_one)
    size_res = float(w.sum()) - 1.0
    cost_res = float(instance.costs @ w) - 1.0
    feasible = bool(np.all(w >= 0) and abs(size_res) <= tol_feas
                    and abs(cost_res) <= tol_feas)
    d = variance_function(instance, info_matrix(instance, w))
    eq = equivalence_check(part, d, instance.m, tol)
    top = float(d[part.zero].max()) if part.n_zero else -np.inf
    for _, block in iter_weighted_variance_blocks(part, d, block_rows):
        top = max(top, float(block.max()))
    eps = max(top - instance.m, 0.0)
    return Certificate(size_res, cost_res, eq.slack_zero, eq.slack_pm, eps,
                       instance.m / (instance.m + eps), feasible,
                       feasible and eq.optimal)
