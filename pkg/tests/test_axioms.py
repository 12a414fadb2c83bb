import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randpref.axioms import (
    Axiom,
    DemandObservationSeries,
    build_revealed_relations,
    check_axiom,
)
from randpref.errors import ValidationError
from randpref import fixtures as F


@pytest.fixture
def cycle3():
    return DemandObservationSeries(F.CYCLE3_PRICES, F.CYCLE3_BUNDLES)


def _random_series(seed, T, L):
    rng = np.random.default_rng(seed)
    prices = rng.uniform(0.5, 2.0, size=(T, L))
    # bundles on each budget with expenditure 1
    w = rng.dirichlet(np.ones(L), size=T)
    return DemandObservationSeries(prices, w / prices)


class TestRevealedRelations:
    def test_cycle_flags(self, cycle3):
        rel = build_revealed_relations(cycle3)
        for t, s in [(0, 1), (1, 2), (2, 0)]:
            assert rel.weak[t, s] and rel.strict[t, s]
            assert not rel.weak[s, t]

    def test_identical_bundles(self):
        series = DemandObservationSeries(F.CYCLE3_PRICES, np.ones((3, 3)))
        rel = build_revealed_relations(series)
        assert rel.weak.all()
        assert not rel.strict.any()

    def test_single_period(self):
        rel = build_revealed_relations(DemandObservationSeries([[1.0, 2.0]], [[1.0, 1.0]]))
        assert rel.weak.tolist() == [[True]]
        assert rel.strict.tolist() == [[False]]


class TestCheckAxiom:
    def test_cycle_satisfies_warp(self, cycle3):
        rep = check_axiom(cycle3, "warp")
        assert rep.holds and rep.witness is None

    def test_cycle_violates_sarp(self, cycle3):
        rep = check_axiom(cycle3, Axiom.SARP)
        assert not rep.holds
        assert rep.witness == (0, 1, 2)

    def test_cycle_satisfies_wgarp(self, cycle3):
        assert check_axiom(cycle3, "wgarp").holds

    @pytest.mark.parametrize("axiom", list(Axiom))
    def test_single_observation(self, axiom):
        series = DemandObservationSeries([[1.0, 2.0, 3.0]], [[1.0, 0.0, 2.0]])
        assert check_axiom(series, axiom).holds

    def test_warp_pair_witness(self):
        # each bundle costs 5 at its own prices and 4 at the other's
        series = DemandObservationSeries([[1.0, 2.0], [2.0, 1.0]], [[1.0, 2.0], [2.0, 1.0]])
        rep = check_axiom(series, "warp")
        assert not rep.holds and rep.witness == (0, 1)
        assert not check_axiom(series, "wgarp").holds

    def test_unknown_axiom(self, cycle3):
        with pytest.raises(ValidationError):
            check_axiom(cycle3, "garp")

    def test_shape_validation(self):
        with pytest.raises(ValidationError):
            DemandObservationSeries([[1.0, 2.0]], [[1.0, 2.0, 3.0]])

    @given(st.integers(0, 100_000), st.integers(2, 6), st.integers(2, 4))
    @settings(max_examples=150, deadline=None)
    def test_implication_chain(self, seed, T, L):
        series = _random_series(seed, T, L)
        sarp = check_axiom(series, "sarp").holds
        warp = check_axiom(series, "warp").holds
        wgarp = check_axiom(series, "wgarp").holds
        assert (not sarp) or warp
        assert (not warp) or wgarp

    @given(st.integers(0, 100_000), st.integers(2, 6))
    @settings(max_examples=150, deadline=None)
    def test_two_goods_warp_equals_sarp(self, seed, T):
        series = _random_series(seed, T, 2)
        assert check_axiom(series, "warp").holds == check_axiom(series, "sarp").holds

    @given(st.integers(0, 100_000), st.lists(st.floats(0.01, 100.0), min_size=4, max_size=4))
    @settings(max_examples=60, deadline=None)
    def test_price_rescaling_invariance(self, seed, scales):
        series = _random_series(seed, 4, 3)
        scaled = DemandObservationSeries(series.prices * np.array(scales)[:, None], series.bundles)
        for ax in Axiom:
            a, b = check_axiom(series, ax), check_axiom(scaled, ax)
            assert a.holds == b.holds and a.witness == b.witness

    def test_sarp_cycle_is_a_cycle(self):
        for seed in range(200):
            series = _random_series(seed, 5, 3)
            rep = check_axiom(series, "sarp")
            if rep.holds:
                continue
            w = rep.witness
            assert w[0] == min(w)
            weak = rep.relations.weak
            for a, b in zip(w, w[1:] + w[:1]):
                assert weak[a, b]
