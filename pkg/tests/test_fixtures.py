from pathlib import Path

import numpy as np
import pytest

from randpref import fixtures as F
from randpref.budgets import compute_patch_partition
from randpref.datafiles import read_budgets_csv, read_observations_csv, read_vector_csv
from randpref.rational_types import infer_blocks, read_gamma_csv
from randpref.stochastic_test import estimate_rho

DATA = Path(__file__).resolve().parents[1] / "data"


class TestDataFiles:
    def test_gamma_csv(self):
        g = read_gamma_csv(DATA / "symmetric3_gamma.csv")
        np.testing.assert_array_equal(g.entries, F.SYMMETRIC3_GAMMA)

    @pytest.mark.parametrize(
        "name, vec",
        [
            ("rho_true.csv", F.RHO_TRUE),
            ("rho_inside.csv", F.RHO_INSIDE),
            ("rho_outside.csv", F.RHO_OUTSIDE),
            ("counterexample_rho.csv", F.COUNTEREXAMPLE_RHO),
        ],
    )
    def test_vectors(self, name, vec):
        np.testing.assert_allclose(read_vector_csv(DATA / name), vec, rtol=0, atol=1e-15)

    @pytest.mark.parametrize(
        "name, budgets",
        [
            ("crossing2_budgets.csv", F.CROSSING2_BUDGETS),
            ("symmetric3_budgets.csv", F.SYMMETRIC3_BUDGETS),
            ("shafer_budgets.csv", F.SHAFER_BUDGETS),
        ],
    )
    def test_budgets(self, name, budgets):
        labels, read = read_budgets_csv(DATA / name)
        assert labels == [str(t + 1) for t in range(len(budgets))]
        for a, b in zip(read, budgets):
            np.testing.assert_allclose(a.prices / a.expenditure, b.prices / b.expenditure)

    def test_crossing_observations(self):
        labels, budgets = read_budgets_csv(DATA / "crossing2_budgets.csv")
        part = compute_patch_partition(budgets)
        obs = read_observations_csv(DATA / "crossing2_observations.csv", labels)
        np.testing.assert_allclose(estimate_rho(obs, part).values, F.CROSSING2_RHO)


class TestVectors:
    def test_blocks_are_distributions(self):
        for vec in (F.RHO_TRUE, F.RHO_INSIDE, F.RHO_OUTSIDE, F.COUNTEREXAMPLE_RHO):
            np.testing.assert_allclose(vec.reshape(3, 4).sum(1), 1.0, atol=1e-12)

    def test_printed_inside_vector_renormalizes(self):
        printed = F.RHO_INSIDE_AS_PRINTED.reshape(3, 4)
        np.testing.assert_allclose(printed / printed.sum(1, keepdims=True), F.RHO_INSIDE.reshape(3, 4))

    def test_published_matrix_differs_by_one_moved_entry(self):
        diff = F.SYMMETRIC3_GAMMA.astype(int) - F.SYMMETRIC3_GAMMA_AS_PUBLISHED.astype(int)
        assert np.count_nonzero(diff) == 2
        assert diff.sum() == 0
        assert infer_blocks(F.SYMMETRIC3_GAMMA) == [4, 4, 4]

    def test_design_signs_cover_every_pattern(self):
        X = F.MC_DESIGN_X
        assert X.shape == (12, 3)
        assert np.all((X == 0).sum(1) == 1)
        assert len({tuple(r) for r in X.tolist()}) == 12
