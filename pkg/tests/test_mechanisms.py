#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Mechanism Tests
Fee grid, threshold-augmented mechanisms, Peer-Max / Peer-Welfare and iid fees
"""

import math

import numpy as np
import pytest

from distribution_auctions.distributions import Degenerate, Discrete, Instance
from distribution_auctions.errors import ParameterError, ValidationError
from distribution_auctions.mechanisms import (
    IidTam,
    PeerMax,
    PeerWelfare,
    TamMechanism,
    alpha_support,
    iid_tam_revenue,
    induce_bid_mechanism,
    mechanism_from_config,
    peer_max_revenue,
    peer_max_sampled_revenue,
    peer_welfare_revenue,
    rev_at_alpha,
    tam_evaluate,
)


def test_alpha_grid_small():
    grid = alpha_support(1, 2)
    assert grid.L == 3
    assert grid.grid == (0.0, 0.125, 0.25, 0.5, 1.0, 2.0)
    assert grid.high_atom == 4.0
    assert sum(prob for _, prob in grid.distribution()) == pytest.approx(1.0)


def test_alpha_grid_larger():
    grid = alpha_support(2, 4)
    assert grid.L == 4
    assert grid.grid == (0.0, 1 / 16, 1 / 8, 1 / 4, 1 / 2, 1.0, 2.0, 4.0)
    assert grid.high_atom == 8.0


@pytest.mark.parametrize("K, n", [(1, 2), (3, 5), (2, 64), (5, 1000)])
def test_alpha_grid_size(K, n):
    grid = alpha_support(K, n)
    assert grid.size == K + grid.L + 2
    assert 0.0 in grid.grid
    assert grid.L == math.ceil(math.log2(4 * n))


def test_alpha_grid_rejects_bad_parameters():
    with pytest.raises(ParameterError):
        alpha_support(0, 2)
    with pytest.raises(ParameterError):
        alpha_support(1, 1)


def test_rev_at_alpha(engine, i1):
    stats = engine.stats_exact(i1, "spa")
    assert rev_at_alpha(stats, 0.0) == pytest.approx(1.5)
    assert rev_at_alpha(stats, 0.25) == pytest.approx(2.5)
    assert rev_at_alpha(stats, 1.0) == 0.0


def test_tam_with_zero_fees_is_second_price(engine, i1):
    report = tam_evaluate("spa", [0.0, 0.0], i1, engine=engine)
    assert report.participates.tolist() == [True, True]
    np.testing.assert_allclose(report.p, [1.0, 0.5])
    assert report.revenue == pytest.approx(1.5)


def test_tam_fee_excludes_low_buyer(engine):
    truthful = Instance((Degenerate(2.0), Degenerate(1.0)))
    report = tam_evaluate("spa", [0.5, 0.5], truthful, true_profile=truthful.buyers, engine=engine)
    np.testing.assert_allclose(report.u_base, [1.0, 0.0])
    assert report.participates.tolist() == [True, False]
    np.testing.assert_allclose(report.p, [1.5, 0.0])
    assert report.utilities[0] == pytest.approx(0.5)

    shaded = truthful.with_buyers([Degenerate(1.0), Degenerate(1.0)])
    deviation = tam_evaluate("spa", [0.5, 0.5], shaded, true_profile=truthful.buyers, engine=engine)
    assert not deviation.participates[0]
    assert deviation.utilities[0] == 0.0


def test_infinite_fees_exclude_everyone(engine, i1):
    report = tam_evaluate("spa", [math.inf, math.inf], i1, engine=engine)
    assert not report.participates.any()
    assert report.revenue == 0.0
    assert report.to_dict()["thresholds"] == [None, None]


def test_peer_max_reference_instance(engine, i1):
    revenue, per_alpha = peer_max_revenue(i1, 1, engine)
    np.testing.assert_allclose([rev for _, rev in per_alpha], [1.5, 2.0, 2.5, 0.0, 0.0, 0.0])
    assert revenue == pytest.approx(0.5)
    assert PeerMax(1, engine).revenue(i1) == pytest.approx(0.5)


def test_peer_max_needs_single_item(engine, three_unit_values):
    with pytest.raises(ParameterError):
        peer_max_revenue(three_unit_values, 1, engine)


def test_peer_welfare_matches_peer_max_on_one_unit(engine, i1):
    assert peer_welfare_revenue(i1, 2, engine)[0] == pytest.approx(peer_max_revenue(i1, 2, engine)[0])


def test_peer_welfare_known_values(engine, three_unit_values):
    revenue, per_alpha = peer_welfare_revenue(three_unit_values, 1, engine)
    np.testing.assert_allclose([rev for _, rev in per_alpha], [4.0, 4.75, 5.5, 3.25, 4.5, 0.0, 0.0])
    assert revenue == pytest.approx(22.0 / 14.0)
    assert PeerWelfare(1, engine).revenue(three_unit_values) == pytest.approx(22.0 / 14.0)


def test_sampled_peer_max_is_close(engine, i1):
    mean_rev, stderr = peer_max_sampled_revenue(i1, 1, 20_000, np.random.default_rng(3), engine)
    assert abs(mean_rev - 0.5) <= 4 * stderr


def test_iid_fees_extract_welfare(engine):
    law = Discrete(((2.0, 0.5), (1.0, 0.5)))
    instance = Instance((law, law))
    np.testing.assert_allclose(IidTam(engine).thresholds(instance), [0.25, 0.25])
    assert iid_tam_revenue(instance, engine) == pytest.approx(1.75)


@pytest.mark.parametrize("instance, expected", [
    (Instance((Degenerate(3.0), Degenerate(3.0))), 3.0),
    (Instance(tuple(Discrete(((1.0, 0.5), (0.0, 0.5))) for _ in range(3))), 7.0 / 8.0),
])
def test_iid_fees_on_identical_laws(engine, instance, expected):
    assert iid_tam_revenue(instance, engine) == pytest.approx(expected)


def test_mechanism_config_round_trip(engine):
    for raw in ({"mech": "peer_max", "k": 2}, {"mech": "peer_welfare", "k": 1}, {"mech": "iid_tam"}):
        assert mechanism_from_config(raw, engine).to_config() == raw

    tam = mechanism_from_config({"mech": "tam", "base": "spa", "thresholds": [1, None]}, engine)
    assert isinstance(tam, TamMechanism)
    assert tam.thresholds == (1.0, math.inf)


@pytest.mark.parametrize("raw", [
    {"mech": "vickrey"},
    {"mech": "peer_max"},
    {"mech": "tam", "thresholds": "0"},
    {"mech": "tam", "thresholds": [True]},
])
def test_mechanism_config_errors(engine, raw):
    with pytest.raises(ValidationError):
        mechanism_from_config(raw, engine)


def test_mechanism_utility_is_ir(engine, i1):
    mechanism = PeerMax(1, engine)
    outcome = mechanism.outcome(i1)
    for i, F in enumerate(i1.buyers):
        assert mechanism.utility(i, i1, F, outcome) >= -1e-12
    assert np.all(outcome.participation <= 1.0 + 1e-12)


def test_induced_table_has_no_violations(engine):
    induced = induce_bid_mechanism(PeerMax(1, engine), Discrete(((2.0, 0.5), (1.0, 0.5))), (0.5, 1.0, 2.0))
    assert len(induced.profiles) == 9
    assert induced.ic_violations() == []
    assert induced.feasibility_violations() == []
    assert induced.ir_violations() == []


def test_induced_table_on_point_mass(engine):
    induced = induce_bid_mechanism(TamMechanism([0.0, 0.0], engine=engine), Degenerate(1.0), (1.0, 2.0))
    row = induced.row((2.0, 1.0))
    np.testing.assert_allclose(induced.x[row], [1.0, 0.0])
    np.testing.assert_allclose(induced.p[row], [1.0, 0.0])
    assert induced.utility(0, 2.0, (2.0, 1.0)) == pytest.approx(1.0)
