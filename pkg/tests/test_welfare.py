import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randpref.budgets import Budget, NormalizedBudget, compute_patch_partition, patch_linear_bounds
from randpref.errors import NotRationalizable, ValidationError
from randpref.rational_types import enumerate_types
from randpref.welfare import (
    budget_preference_indicator,
    counterfactual_expectation_bounds,
    counterfactual_patch_probability_bounds,
    counterfactual_setup,
    dominance_relation,
    expenditure_share_coefficients,
    welfare_bounds,
)
from randpref import fixtures as F

from oracles import (
    brute_force_types,
    columns_from_choices,
    n_subsets,
    random_crossing_prices,
    vertex_bounds,
)


@pytest.fixture(scope="module")
def crossing():
    part = compute_patch_partition(F.CROSSING2_BUDGETS)
    return part, enumerate_types(part, "warp")


def _small_instance(seed, axiom="warp", max_subsets=3000):
    rng = np.random.default_rng(seed)
    for _ in range(50):
        T, L = int(rng.integers(2, 4)), int(rng.integers(2, 4))
        part = compute_patch_partition(random_crossing_prices(rng, T, L))
        g = enumerate_types(part, axiom)
        r = np.linalg.matrix_rank(g.as_float())
        if n_subsets(g.n_types, r) <= max_subsets:
            rho = g.as_float() @ rng.dirichlet(np.ones(g.n_types))
            return rng, part, g, rho
    pytest.skip("no small instance drawn")


class TestDominance:
    def test_crossing_type_indicator(self, crossing):
        part, g = crossing
        # the type choosing (below on 0, above on 1) prefers budget 1
        ind = budget_preference_indicator(g, part, 1, 0)
        assert ind.tolist() == [1, 0, 0]
        assert budget_preference_indicator(g, part, 0, 1).tolist() == [0, 1, 0]

    def test_nested_outer_dominates(self):
        part = compute_patch_partition([np.array([1.0, 1.0]), np.array([2.0, 2.0])])
        g = enumerate_types(part, "warp")
        assert budget_preference_indicator(g, part, 0, 1).tolist() == [1]
        assert budget_preference_indicator(g, part, 1, 0).tolist() == [0]

    def test_mutually_above_type(self, crossing):
        part, g = crossing
        j = [tuple(c) for c in g.choices].index((1, 1))
        assert budget_preference_indicator(g, part, 0, 1)[j] == 0
        assert budget_preference_indicator(g, part, 1, 0)[j] == 0

    @given(st.integers(0, 10**6))
    @settings(max_examples=30, deadline=None)
    def test_asymmetry(self, seed):
        rng = np.random.default_rng(seed)
        part = compute_patch_partition(random_crossing_prices(rng, 3, 3))
        rel = dominance_relation(part)
        for (t, s), f in rel.flags.items():
            assert not np.any(f & rel.flags[(s, t)].T)

    def test_indicator_from_entries_only(self, crossing):
        from randpref.rational_types import TypeMatrix

        part, g = crossing
        bare = TypeMatrix(g.entries)
        assert budget_preference_indicator(bare, part, 1, 0).tolist() == [1, 0, 0]


class TestWelfareBounds:
    def test_crossing_point_identified(self, crossing):
        part, g = crossing
        wb = welfare_bounds(g, part, F.CROSSING2_RHO, 1, 0)
        assert wb.gamma_lower == pytest.approx(0.25)
        assert wb.gamma_upper == pytest.approx(0.25)
        assert wb.better_off_interval == pytest.approx((0.25, 2 / 3))

    def test_degenerate_mixture(self, crossing):
        part, g = crossing
        rho = g.as_float()[:, 0]
        wb = welfare_bounds(g, part, rho, 1, 0)
        assert wb.gamma_lower == wb.gamma_upper == pytest.approx(1.0)

    def test_not_rationalizable(self):
        part = compute_patch_partition(F.SYMMETRIC3_BUDGETS)
        g = enumerate_types(part, "warp")
        bad = np.tile([0.5, 0.0, 0.0, 0.5], 3)
        from randpref.cone import feasibility

        if feasibility(g, bad).feasible:
            pytest.skip("vector happens to be feasible")
        with pytest.raises(NotRationalizable):
            welfare_bounds(g, part, bad, 0, 1)

    @given(st.integers(0, 10**6))
    @settings(max_examples=40, deadline=None)
    def test_ordering_and_oracle(self, seed):
        rng, part, g, rho = _small_instance(seed)
        T = part.n_budgets
        t, s = rng.choice(T, size=2, replace=False)
        wb = welfare_bounds(g, part, rho, int(t), int(s))
        assert wb.gamma_lower <= wb.gamma_upper + 1e-9
        assert wb.gamma_upper <= 1 - wb.beta_lower + 1e-9
        ind = budget_preference_indicator(g, part, int(t), int(s))
        lo, hi = vertex_bounds(g.as_float(), rho, ind)
        assert wb.gamma_lower == pytest.approx(lo, abs=1e-6)
        assert wb.gamma_upper == pytest.approx(hi, abs=1e-6)

    @given(st.integers(0, 10**6))
    @settings(max_examples=30, deadline=None)
    def test_rum_bounds_nested_in_rpm(self, seed):
        rng = np.random.default_rng(seed)
        part = compute_patch_partition(random_crossing_prices(rng, 3, 3))
        gs = enumerate_types(part, "sarp")
        gw = enumerate_types(part, "warp")
        rho = gs.as_float() @ rng.dirichlet(np.ones(gs.n_types))
        a = welfare_bounds(gs, part, rho, 0, 1)
        b = welfare_bounds(gw, part, rho, 0, 1)
        assert b.gamma_lower <= a.gamma_lower + 1e-8
        assert a.gamma_upper <= b.gamma_upper + 1e-8
        assert b.beta_lower <= a.beta_lower + 1e-8


def _brute_counterfactual(observed_prices, rho, q0, objective_rows):
    """Bounds from geometric type enumeration on the extended budgets."""
    ext = [NormalizedBudget(q0, 0)] + [
        NormalizedBudget(p, t + 1) for t, p in enumerate(observed_prices)
    ]
    part = compute_patch_partition(ext)
    obs = compute_patch_partition(observed_prices)
    choices = brute_force_types(part, "warp")
    n0 = part.block_sizes[0]
    # constraint rows: coarse observed patch probabilities
    M = np.zeros((obs.n_rows, len(choices)))
    for j, c in enumerate(choices):
        for t in range(obs.n_budgets):
            p = part.patch(t + 1, c[t + 1])
            label = "".join(sd.letter for s, sd in p.sign_vector if s != 0)
            M[obs.row_index(t, obs.find(t, label)), j] = 1
    obj = np.array([objective_rows(part, c[0]) for c in choices])
    return part, vertex_bounds(M, rho, obj)


class TestCounterfactual:
    def test_duplicate_budget_collapses(self):
        setup = counterfactual_setup(F.CROSSING2_BUDGETS, F.CROSSING2_RHO, [1.0, 2.0], 5.0)
        assert setup.duplicate_of == 0
        for i, r in enumerate(F.CROSSING2_RHO[:2]):
            lo, hi = counterfactual_patch_probability_bounds(setup, i)
            assert lo == pytest.approx(r) and hi == pytest.approx(r)

    def test_duplicate_budget_expectation(self):
        setup = counterfactual_setup(F.CROSSING2_BUDGETS, F.CROSSING2_RHO, [1.0, 2.0], 5.0)
        part = setup.observed_partition
        z = np.array([1.0, 0.0])
        h = [patch_linear_bounds(part, part.patch(0, i), z) for i in range(2)]
        lo, hi = counterfactual_expectation_bounds(setup, z)
        assert lo == pytest.approx(sum(r * b[0] for r, b in zip(F.CROSSING2_RHO[:2], h)))
        assert hi == pytest.approx(sum(r * b[1] for r, b in zip(F.CROSSING2_RHO[:2], h)))

    def test_own_prices_give_unit_expectation(self):
        p0, w0 = np.array([1.5, 1.5]), 5.0
        setup = counterfactual_setup(F.CROSSING2_BUDGETS, F.CROSSING2_RHO, p0, w0)
        lo, hi = counterfactual_expectation_bounds(setup, p0 / w0)
        assert lo == pytest.approx(1.0) and hi == pytest.approx(1.0)

    def test_crossing_counterfactual_is_unconstrained(self):
        setup = counterfactual_setup(F.CROSSING2_BUDGETS[:1], [1.0], [2.0, 1.0], 5.0)
        for i in range(setup.n_counterfactual_patches):
            assert counterfactual_patch_probability_bounds(setup, i) == pytest.approx((0.0, 1.0))

    def test_disjoint_higher_budget_has_one_patch(self):
        setup = counterfactual_setup(F.CROSSING2_BUDGETS[:1], [1.0], [2.0, 2.0], 1.0)
        assert setup.n_counterfactual_patches == 1
        assert counterfactual_patch_probability_bounds(setup, 0) == pytest.approx((1.0, 1.0))

    def test_intermediate_budget_against_brute_force(self):
        prices = [b.prices / b.expenditure for b in F.CROSSING2_BUDGETS]
        q0 = np.array([1.5, 1.5]) / 5.0
        setup = counterfactual_setup(F.CROSSING2_BUDGETS, F.CROSSING2_RHO, [1.5, 1.5], 5.0)
        assert setup.partition.n_rows > 4
        sums = [0.0, 0.0]
        for i in range(setup.n_counterfactual_patches):
            got = counterfactual_patch_probability_bounds(setup, i)
            _, ref = _brute_counterfactual(prices, F.CROSSING2_RHO, q0, lambda part, c: float(c == i))
            assert got == pytest.approx(ref, abs=1e-6)
            sums[0] += got[0]
            sums[1] += got[1]
        assert sums[0] <= 1 + 1e-9 <= sums[1] + 2e-9
        z = np.array([1.0, 0.0])
        got = counterfactual_expectation_bounds(setup, z)
        _, lo_ref = _brute_counterfactual(
            prices, F.CROSSING2_RHO, q0,
            lambda part, c: patch_linear_bounds(part, part.patch(0, c), z)[0],
        )
        _, hi_ref = _brute_counterfactual(
            prices, F.CROSSING2_RHO, q0,
            lambda part, c: patch_linear_bounds(part, part.patch(0, c), z)[1],
        )
        assert got[0] == pytest.approx(lo_ref[0], abs=1e-6)
        assert got[1] == pytest.approx(hi_ref[1], abs=1e-6)

    @given(st.integers(0, 10**6))
    @settings(max_examples=25, deadline=None)
    def test_random_against_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        L = int(rng.integers(2, 4))
        prices = random_crossing_prices(rng, 2, L)
        part = compute_patch_partition(prices)
        g = enumerate_types(part, "warp")
        rho = g.as_float() @ rng.dirichlet(np.ones(g.n_types))
        q0 = rng.uniform(0.5, 2.0, L)
        budgets = [Budget(p, 1.0) for p in prices]
        setup = counterfactual_setup(budgets, rho, q0, 1.0)
        if n_subsets(setup.types.n_types, np.linalg.matrix_rank(setup.constraint_matrix)) > 5000:
            return
        for i in range(setup.n_counterfactual_patches):
            got = counterfactual_patch_probability_bounds(setup, i)
            _, ref = _brute_counterfactual(prices, rho, q0, lambda part, c: float(c == i))
            assert got == pytest.approx(ref, abs=1e-6)

    def test_not_rationalizable(self):
        part = compute_patch_partition(F.SYMMETRIC3_BUDGETS)
        bad = np.empty(12)
        g = enumerate_types(part, "warp")
        from randpref.rational_types import equal_up_to_permutation

        rows, _ = equal_up_to_permutation(g, F.SYMMETRIC3_GAMMA)
        bad[rows] = F.COUNTEREXAMPLE_RHO
        setup = counterfactual_setup(F.SYMMETRIC3_BUDGETS, bad, [0.3, 0.3, 0.4], 1.0)
        with pytest.raises(NotRationalizable):
            counterfactual_patch_probability_bounds(setup, 0)

    def test_validation(self):
        with pytest.raises(ValidationError):
            counterfactual_setup(F.CROSSING2_BUDGETS, F.CROSSING2_RHO, [-1.0, 1.0], 1.0)
        setup = counterfactual_setup(F.CROSSING2_BUDGETS, F.CROSSING2_RHO, [1.5, 1.5], 5.0)
        with pytest.raises(ValidationError):
            counterfactual_patch_probability_bounds(setup, 99)
        with pytest.raises(ValidationError):
            counterfactual_expectation_bounds(setup, [1.0, 2.0, 3.0])

    def test_expenditure_share(self):
        z = expenditure_share_coefficients([2.0, 4.0], 8.0, 1)
        np.testing.assert_allclose(z, [0.0, 0.5])
