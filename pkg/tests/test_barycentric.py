import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import example1, random_feasible_design, small_mixed_instance
from costdesign.barycentric import (EmptyStratumError,
                                    InfeasibleRenormalizationError,
                                    SolverOptions, Status, ZeroSError,
                                    barycentric_coordinates,
                                    barycentric_update, certify,
                                    delete_redundant, epsilon_and_bounds,
                                    equivalence_check, initial_design,
                                    mix_to_equality, renormalize,
                                    solve_equality, solve_inequality,
                                    vertex_matrix)
from costdesign.instances import RandomSpec, random_instance
from costdesign.model import (DesignInstance, feasibility_residuals,
                              info_matrix, pair_kernel, partition,
                              variance_function, weighted_variances)
from costdesign.oracle import frank_wolfe_reference


def uniform_optimal_instance(seed: int, m: int = 3) -> DesignInstance:
    """``m`` points with mixed costs whose uniform design has ``d = m`` everywhere."""
    rng = np.random.default_rng(seed)
    F = rng.standard_normal((m, m)) + 3 * np.eye(m)
    z = rng.uniform(-0.2, 0.2, m)
    z[0], z[1] = 0.5, -0.5
    costs = 1.0 + z - z.mean()
    return DesignInstance(F, costs)


def run_with_callback(inst, **kw):
    events = []
    opts = SolverOptions(callback=events.append, **kw)
    report = solve_equality(inst, opts)
    return report, events


class TestInitialDesign:
    def test_three_point(self, three_point):
        w = initial_design(partition(three_point))
        np.testing.assert_allclose(w, [0.25, 0.25, 0.5], rtol=1e-15)
        assert three_point.costs @ w == pytest.approx(1.0, abs=1e-15)

    def test_example1_unique_point(self, ex1_mixed):
        w = initial_design(partition(ex1_mixed))
        np.testing.assert_allclose(w, [8 / 13, 5 / 13], rtol=1e-15)

    def test_symmetric_strata(self):
        inst = DesignInstance(np.eye(4), [1.5, 1.5, 0.5, 0.5])
        w = initial_design(partition(inst))
        np.testing.assert_allclose(w, 0.25, rtol=1e-15)

    @given(st.integers(0, 2**31 - 1))
    def test_feasible_and_positive(self, seed):
        inst = small_mixed_instance(seed, n=8)
        w = initial_design(partition(inst))
        assert np.all(w > 0)
        assert max(feasibility_residuals(w, inst)) <= 1e-12

    def test_needs_pairs(self):
        with pytest.raises(EmptyStratumError):
            initial_design(partition(DesignInstance(np.eye(2), [0.5, 1.0])))


class TestBarycentricCoordinates:
    @settings(max_examples=50)
    @given(st.integers(0, 2**31 - 1))
    def test_reconstruction(self, seed):
        inst = small_mixed_instance(seed, n=7)
        part = partition(inst)
        w = random_feasible_design(part, np.random.default_rng(seed))
        pair, w0 = barycentric_coordinates(w, part)
        lam = np.concatenate([pair.ravel(), w0])
        assert np.all(lam >= 0)
        assert lam.sum() == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(lam @ vertex_matrix(part), w, atol=1e-12)

    def test_zero_s(self, three_point):
        pair, w0 = barycentric_coordinates([0.0, 0.0, 1.0], partition(three_point))
        np.testing.assert_array_equal(pair, [[0.0]])
        np.testing.assert_array_equal(w0, [1.0])


class TestUpdate:
    def test_example1_fixed(self, ex1_mixed):
        part = partition(ex1_mixed)
        w = np.array([8 / 13, 5 / 13])
        np.testing.assert_allclose(barycentric_update(ex1_mixed, part, w), w,
                                   rtol=1e-14)

    @given(st.integers(0, 2**31 - 1), st.integers(2, 5))
    def test_fixed_point_when_variances_equal_m(self, seed, m):
        inst = uniform_optimal_instance(seed, m)
        part = partition(inst)
        w = np.full(m, 1.0 / m)
        d = variance_function(inst, info_matrix(inst, w))
        np.testing.assert_allclose(d, m, rtol=1e-10)
        np.testing.assert_allclose(barycentric_update(inst, part, w), w,
                                   atol=1e-12)

    @given(st.integers(0, 2**31 - 1))
    def test_determinant_does_not_decrease(self, seed):
        inst = small_mixed_instance(seed, n=8, m=3)
        part = partition(inst)
        w = random_feasible_design(part, np.random.default_rng(seed))
        before = info_matrix(inst, w).logdet
        after = info_matrix(inst, barycentric_update(inst, part, w)).logdet
        assert after >= before - 1e-12

    def test_zero_s_raises(self):
        F = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [0.0, 1.0]])
        inst = DesignInstance(F, [1.5, 0.5, 1.0, 1.0])
        with pytest.raises(ZeroSError):
            barycentric_update(inst, partition(inst),
                               np.array([0.0, 0.0, 0.5, 0.5]))


class TestEpsilon:
    def test_all_equal_m(self):
        assert epsilon_and_bounds(None, np.full((2, 3), 4.0), [4.0], 4) == (0.0, 1.0)

    def test_gap(self):
        eps, eff = epsilon_and_bounds(None, [[4.04, 3.0]], [3.9], 4)
        assert eps == pytest.approx(0.04)
        assert eff == pytest.approx(4 / 4.04)
        assert eff == pytest.approx(0.990099, abs=1e-6)

    def test_example1_optimum(self, ex1_mixed):
        part = partition(ex1_mixed)
        Delta = weighted_variances(part, np.array([1.625, 2.6]))
        eps, eff = epsilon_and_bounds(part, Delta, [], 2)
        assert eps == pytest.approx(0.0, abs=1e-14)


class TestEquivalence:
    def test_example1(self, ex1_mixed):
        res = equivalence_check(partition(ex1_mixed), [1.625, 2.6], 2, tol=1e-12)
        assert res.optimal
        assert res.slack_pm == pytest.approx(0.0, abs=1e-14)
        assert res.slack_zero == -math.inf

    def test_all_m(self, three_point):
        res = equivalence_check(partition(three_point), [2.0, 2.0, 2.0], 2)
        assert res.optimal
        assert res.slack_zero == 0.0 and res.slack_pm == 0.0

    def test_initial_design_not_optimal(self):
        inst = small_mixed_instance(2, n=4, m=2, with_zero=False)
        part = partition(inst)
        d0 = variance_function(inst, info_matrix(inst, initial_design(part)))
        res = equivalence_check(part, d0, 2)
        assert not res.optimal and res.slack_pm > 0
        rep = solve_equality(inst, SolverOptions(target_eff=1 - 1e-12))
        d = variance_function(inst, info_matrix(inst, rep.w))
        assert equivalence_check(part, d, 2, tol=1e-9).optimal


class TestDeletion:
    def test_zero_gap_removes_below_m(self, three_point):
        part = partition(three_point)
        Delta = np.array([[1.5]])
        gone = delete_redundant(part, Delta, np.array([2.0]), 0.0, 2)
        assert gone.tolist() == [0, 1]

    def test_keeps_borderline(self, three_point):
        part = partition(three_point)
        gone = delete_redundant(part, np.array([[2.0]]), np.array([2.0]), 0.0, 2)
        assert gone.size == 0

    @pytest.mark.parametrize("seed", range(6))
    def test_sound_against_oracle(self, seed):
        inst = small_mixed_instance(100 + seed, n=5, m=2)
        part = partition(inst)
        rep = solve_equality(inst, SolverOptions(target_eff=1 - 1e-9,
                                                 deletion_interval=1))
        ref = frank_wolfe_reference(inst, part, 20000, gap_tol=1e-10)
        assert np.all(ref.w[rep.deleted] <= 1e-8)


class TestRenormalize:
    def test_three_strata(self):
        inst = DesignInstance(np.eye(3), [2.0, 0.5, 1.0])
        w = renormalize(np.array([0.2, 0.3, 0.3]), partition(inst))
        np.testing.assert_allclose(w, [0.075 / 0.072 * 0.2, 0.1 / 0.072 * 0.3,
                                       0.375], rtol=1e-14)
        np.testing.assert_allclose(w, [0.208333, 0.416667, 0.375], atol=1e-6)
        assert max(feasibility_residuals(w, inst)) <= 1e-15

    def test_feasible_unchanged(self, three_point):
        w = np.array([0.25, 0.25, 0.5])
        np.testing.assert_allclose(renormalize(w, partition(three_point)), w,
                                   rtol=1e-15)

    def test_unit_cost_only(self, three_point):
        w = renormalize(np.array([0.0, 0.0, 0.5]), partition(three_point))
        np.testing.assert_array_equal(w, [0.0, 0.0, 1.0])

    def test_one_sided(self, three_point):
        with pytest.raises(InfeasibleRenormalizationError):
            renormalize(np.array([0.3, 0.0, 0.5]), partition(three_point))

    @given(st.integers(0, 2**31 - 1))
    def test_restores_feasibility(self, seed):
        inst = small_mixed_instance(seed, n=8)
        rng = np.random.default_rng(seed)
        w = rng.uniform(0.01, 1.0, inst.n)
        w = renormalize(w, partition(inst))
        assert max(feasibility_residuals(w, inst)) <= 1e-12


class TestMixToEquality:
    def test_alpha_one(self):
        inst = example1(0.5, 1.8)
        w_star = np.array([8 / 13, 5 / 13])
        np.testing.assert_allclose(
            mix_to_equality(w_star, np.array([0.5, 0.5]), inst), w_star)

    def test_gamma_two_thirds(self):
        inst = DesignInstance(np.eye(2), [0.5, 3.5])
        w_star = np.array([1.0, 0.0])       # alpha = 0.5
        w_s = np.array([0.5, 0.5])          # beta = 2
        w = mix_to_equality(w_star, w_s, inst)
        np.testing.assert_allclose(w, 2 / 3 * w_star + 1 / 3 * w_s, rtol=1e-14)
        assert max(feasibility_residuals(w, inst)) <= 1e-15

    def test_precondition(self):
        inst = example1(2.0, 2.0)
        w = np.array([0.5, 0.5])
        with pytest.raises(ValueError, match="cost"):
            mix_to_equality(w, w, inst)


class TestSolveEquality:
    def test_example1(self, ex1_mixed):
        rep = solve_equality(ex1_mixed)
        assert rep.status is Status.CONVERGED
        assert rep.iterations == 0
        assert rep.eff_lb == pytest.approx(1.0, abs=1e-14)
        np.testing.assert_allclose(rep.w, [8 / 13, 5 / 13], rtol=1e-14)
        assert rep.phi == pytest.approx(math.sqrt(40 / 169), rel=1e-14)

    def test_random_paper_configuration(self):
        inst = random_instance(RandomSpec(n=600, m=4, p0=0.5, ppm=0.5, seed=3))
        rep = solve_equality(inst)
        assert rep.status is Status.CONVERGED
        assert rep.eff_lb >= 0.99999
        assert max(feasibility_residuals(rep.w, inst)) <= 1e-9
        assert len(rep.deleted) > 0
        assert np.all(rep.w[rep.deleted] == 0.0)

    @settings(max_examples=25)
    @given(st.integers(0, 2**31 - 1))
    def test_certificate_consistency(self, seed):
        # slack_pm is bounded by eps / K at the pair attaining both maxima
        inst = small_mixed_instance(seed, n=9, m=3)
        target = 0.9999
        rep = solve_equality(inst, SolverOptions(target_eff=target))
        if rep.status is not Status.CONVERGED:
            return
        part = partition(inst)
        d = variance_function(inst, info_matrix(inst, rep.w))
        eq = equivalence_check(part, d, inst.m)
        eps = inst.m * (1 / target - 1)
        assert eq.slack_zero <= eps * (1 + 1e-9)
        i = np.argmax((d[part.plus] - inst.m) / part.delta_plus)
        j = np.argmax((d[part.minus] - inst.m) / part.delta_minus)
        K = pair_kernel(part.delta_plus[[i]], part.delta_minus[[j]])[0, 0]
        assert eq.slack_pm <= eps / K * (1 + 1e-9)

    @settings(max_examples=25)
    @given(st.integers(0, 2**31 - 1), st.sampled_from([1, 4, None]))
    def test_iteration_invariants(self, seed, interval):
        inst = small_mixed_instance(seed, n=10, m=3)
        rep, events = run_with_callback(inst, target_eff=0.99999,
                                        deletion_interval=interval)
        evals = [e for e in events if e.event == "evaluate"]
        for e in events:
            assert max(feasibility_residuals(e.w, inst)) <= 1e-9
            d = variance_function(inst, info_matrix(inst, e.w))
            assert abs(e.w @ d - inst.m) <= 1e-9
        logdet = np.array([e.logdet for e in evals])
        assert np.all(np.diff(logdet) >= -1e-12 * np.abs(logdet[:-1]) - 1e-15)
        active = [e.w[e.w > 0] for e in evals]
        assert all(a.size > 0 for a in active)
        if rep.lemma_iteration is not None:
            assert rep.min_s > 1e-14

    def test_trace_monotone(self):
        inst = random_instance(RandomSpec(n=200, m=3, seed=9))
        rep = solve_equality(inst, SolverOptions(trace_interval=1))
        phis = np.array([r.phi for r in rep.trace])
        assert np.all(np.diff(phis) >= -1e-12 * phis[:-1])
        assert rep.trace[-1].iteration == rep.iterations

    def test_stratified_sums_constant(self):
        rng = np.random.default_rng(4)
        F = rng.standard_normal((12, 3))
        c_hi, c_lo = 1.7, 0.4
        costs = np.where(np.arange(12) < 5, c_hi, c_lo)
        inst = DesignInstance(F, costs)
        _, events = run_with_callback(inst, deletion_interval=None,
                                      max_iters=300)
        s_plus = (1 - c_lo) / (c_hi - c_lo)
        for e in events:
            assert e.w[:5].sum() == pytest.approx(s_plus, abs=1e-12)
            assert e.w[5:].sum() == pytest.approx(1 - s_plus, abs=1e-12)

    def test_block_rows_match_dense(self):
        inst = random_instance(RandomSpec(n=120, m=3, seed=2))
        dense = solve_equality(inst)
        blocked = solve_equality(inst, SolverOptions(block_rows=7))
        assert blocked.iterations == dense.iterations
        np.testing.assert_allclose(blocked.w, dense.w, rtol=1e-10, atol=1e-15)

    def test_max_iters(self):
        inst = random_instance(RandomSpec(n=100, m=3, seed=2))
        rep = solve_equality(inst, SolverOptions(max_iters=3))
        assert rep.status is Status.MAX_ITERS
        assert not rep.status.ok
        assert rep.iterations == 3

    def test_non_mixed_rejected(self):
        inst = DesignInstance(np.eye(2), [1.0, 1.0])
        with pytest.raises(EmptyStratumError):
            solve_equality(inst)
        rep = solve_equality(inst, SolverOptions(fallback=True))
        assert rep.status is Status.COLLAPSED
        np.testing.assert_allclose(rep.w, [0.5, 0.5])

    def test_collapse_after_deletion(self):
        inst = random_instance(RandomSpec(n=600, m=4, p0=0.99, seed=0))
        rep = solve_equality(inst)
        assert rep.status is Status.COLLAPSED
        assert rep.eff_lb >= 0.99999
        part = partition(inst)
        assert np.all(rep.w[part.plus] == 0) and np.all(rep.w[part.minus] == 0)

    def test_cost_bump(self):
        inst = random_instance(RandomSpec(n=200, m=3, seed=1))
        rep = solve_equality(inst, SolverOptions(cost_bump=1e-3))
        assert rep.status is Status.CONVERGED
        assert not rep.warnings

    def test_milestones(self):
        inst = random_instance(RandomSpec(n=200, m=3, seed=1))
        rep = solve_equality(inst, SolverOptions(milestones=(0.999, 0.99)))
        assert [s.level for s in rep.snapshots] == [0.99, 0.999]
        assert rep.snapshots[0].iteration <= rep.snapshots[1].iteration

    @pytest.mark.parametrize("kw", [{"target_eff": 1.0},
                                    {"deletion_interval": 0},
                                    {"cost_bump": -1.0},
                                    {"trace_interval": 0}])
    def test_options_validated(self, kw):
        with pytest.raises(ValueError):
            SolverOptions(**kw)


class TestSolveInequality:
    def test_size_shortcut(self):
        rep = solve_inequality(example1(0.8, 1.0))
        assert rep.status is Status.SHORTCUT_SIZE
        np.testing.assert_allclose(rep.w, [0.5, 0.5], atol=1e-9)

    def test_cost_shortcut(self):
        rep = solve_inequality(example1(2.0, 2.0))
        assert rep.status is Status.SHORTCUT_COST
        np.testing.assert_allclose(rep.w, [0.25, 0.25], atol=1e-9)

    def test_both_active(self):
        rep = solve_inequality(example1(0.5, 1.8))
        assert rep.status is Status.CONVERGED
        assert sorted(rep.w) == pytest.approx(sorted([8 / 13, 5 / 13]), abs=1e-12)
        assert max(feasibility_residuals(rep.w, example1(0.5, 1.8))) <= 1e-12


class TestCertify:
    def test_example1(self, ex1_mixed):
        cert = certify(ex1_mixed, [8 / 13, 5 / 13], tol=1e-12)
        assert cert.feasible and cert.optimal
        assert cert.eff_lb == pytest.approx(1.0)

    def test_infeasible(self, ex1_mixed):
        cert = certify(ex1_mixed, [0.9, 0.1])
        assert not cert.feasible and not cert.optimal
        assert cert.cost_residual == pytest.approx(-0.37)
