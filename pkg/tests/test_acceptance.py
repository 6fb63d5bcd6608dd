#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Acceptance Test Suite
End-to-end reproduction checks; run with ``pytest -m slow``
"""

import math

import numpy as np
import pytest

from distribution_auctions.audits import (
    SweepConfig,
    arrangement_audit,
    concentration_audit,
    either_or_bound,
    ic_audit,
    posted_price_cap,
    sweep,
    upper_bound_audit,
)
from distribution_auctions.cli import main
from distribution_auctions.distributions import Discrete, Instance, sample_many
from distribution_auctions.generators import (
    hard_family,
    make_truncated_er_iid,
    random_discrete_instance,
    random_iid_instance,
    random_multi_unit_instance,
)
from distribution_auctions.mechanisms import (
    IidTam,
    PeerMax,
    PeerWelfare,
    TamMechanism,
    iid_tam_revenue,
    induce_bid_mechanism,
    peer_max_revenue,
)

pytestmark = pytest.mark.slow


def test_iid_full_extraction(engine):
    stream = np.random.default_rng(2024)
    for _ in range(100):
        n = int(stream.integers(2, 5))
        k = int(stream.integers(1, 5))
        instance = random_iid_instance(n, k, 10.0, stream)
        wel = engine.stats(instance, "spa").wel
        assert iid_tam_revenue(instance, engine) == pytest.approx(wel, abs=1e-9)


def test_accounting_identity_both_models(engine):
    stream = np.random.default_rng(99)
    for _ in range(1000):
        n = int(stream.integers(2, 5))
        k = int(stream.integers(1, 4))
        for instance, model in ((random_discrete_instance(n, k, 10.0, stream), "spa"),
                                (random_multi_unit_instance(n, k, 10.0, 3, 2, stream), "vcg")):
            stats = engine.stats_exact(instance, model)
            assert stats.accounting_gaps().max() <= 1e-9
            assert stats.chain_violation() <= 1e-9


def test_single_item_either_or_sweep(engine, i1):
    result = sweep(SweepConfig(count=1000, n_range=(2, 5), k_range=(1, 3), K=(1, 2, 3), seed=7), engine)
    assert result.summary.violations == 0

    revenue, _ = peer_max_revenue(i1, 1, engine)
    assert revenue == pytest.approx(0.5, abs=1e-12)
    assert either_or_bound(2.5, 1.5, 1, 2) == pytest.approx(0.0520833, abs=1e-7)


def test_multi_unit_either_or_sweep(engine):
    config = SweepConfig(count=500, n_range=(2, 4), k_range=(1, 3), K=(1, 2), model="vcg",
                         m_max=3, d_max=2, seed=11)
    assert sweep(config, engine).summary.violations == 0


@pytest.mark.parametrize("n", [2, 3])
def test_ic_over_finite_classes(engine, n):
    stream = np.random.default_rng(n)
    members = [random_discrete_instance(2, 2, 5.0, stream).buyers[0] for _ in range(3 if n == 3 else 4)]
    mechanisms = [
        TamMechanism([0.5] * n, engine=engine),
        PeerMax(1, engine),
        PeerWelfare(2, engine),
        IidTam(engine),
    ]
    for mechanism in mechanisms:
        report = ic_audit(mechanism, members, n, engine=engine)
        assert report.max_regret <= 1e-9, f"{mechanism!r}: {report.witness}"


def test_truncated_equal_revenue_closed_forms(engine):
    instance = make_truncated_er_iid(2, 4.0, 1.0)
    estimate = engine.stats_mc(instance, "spa", 1_000_000, np.random.default_rng(6))
    assert abs(estimate.base_rev - 7.0 / 4.0) <= 4 * estimate.stderr["base_rev"]

    draws = sample_many(instance.buyers[0], 1_000_000, np.random.default_rng(8))
    stderr = draws.std(ddof=1) / math.sqrt(draws.size)
    assert abs(draws.mean() - (1.0 + math.log(4.0))) <= 4 * stderr


def test_hard_family_machinery(engine):
    for n in (16, 64, 256, 1024):
        assert posted_price_cap(hard_family("general", n)).ok

    for n in (64, 256):
        report = concentration_audit(n, 2000, np.random.default_rng([1, n]))
        assert report.lower_bound >= 0.5

    upper = upper_bound_audit(PeerMax(1, engine), 64, 300, np.random.default_rng(0), engine)
    assert upper.ok


def test_identity_arrangement_is_optimal(engine):
    stream = np.random.default_rng(5)
    thirds = np.full(3, 1.0 / 3.0)

    def grid_law():
        return Discrete(tuple(zip(stream.uniform(0, 5, 3).tolist(), thirds.tolist())))

    for _ in range(50):
        single = Instance((grid_law(), grid_law()))
        assert arrangement_audit(TamMechanism([0.0, 0.0], engine=engine), single, 0, 3,
                                 reported=grid_law(), engine=engine)

        multi = Instance((grid_law(), grid_law(), grid_law()), m=2.0)
        assert arrangement_audit(PeerWelfare(1, engine), multi, 1, 3, reported=grid_law(), engine=engine)


def test_induced_tables_clean(engine):
    stream = np.random.default_rng(13)
    factor_grids = [(1.0,), (0.5, 2.0), (0.0, 1.0, 3.0), (0.25, 0.5, 1.0, 2.0)]
    for factors in factor_grids:
        base = random_discrete_instance(2, 3, 4.0, stream).buyers[0]
        induced = induce_bid_mechanism(PeerMax(1, engine), base, factors, n=2)
        assert induced.ic_violations() == []
        assert induced.feasibility_violations() == []


def test_cli_runs_are_byte_identical(capsys, i1_json):
    runs = [
        ["stats", "--instance", i1_json, "--engine", "mc", "--samples", "5000", "--seed", "9"],
        ["run-pm", "--instance", i1_json, "--k", "2", "--output", "csv"],
        ["reproduce", "lower", "--count", "25", "--seed", "4"],
    ]
    for argv in runs:
        first_code = main(argv)
        first = capsys.readouterr().out
        second_code = main(argv)
        assert first_code == second_code == 0
        assert capsys.readouterr().out == first
