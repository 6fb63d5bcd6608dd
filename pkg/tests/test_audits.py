#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Audit Tests
Either-or bound, IC search, arrangements, hard-family audits and sweeps
"""

import math

import numpy as np
import pytest

from distribution_auctions.audits import (
    SweepConfig,
    arrangement_audit,
    arrangement_report,
    binomial_lower_bound,
    concentration_audit,
    degenerate_audit,
    either_or_bound,
    guarantee_report,
    ic_audit,
    posted_price_cap,
    sweep,
    upper_bound_audit,
)
from distribution_auctions.distributions import Degenerate, Discrete, Instance
from distribution_auctions.errors import DomainError, ParameterError
from distribution_auctions.generators import hard_family
from distribution_auctions.mechanisms import IidTam, PeerMax, TamMechanism


def test_either_or_bound_reference():
    assert either_or_bound(2.5, 1.5, 1, 2) == pytest.approx(2.5 / 48)
    assert either_or_bound(2.5, 0.0, 1, 2) == 0.0
    assert either_or_bound(0.0, 1.5, 1, 2) == 0.0
    with pytest.raises(ParameterError):
        either_or_bound(1.0, 1.0, 0, 2)


def test_guarantee_report_margin():
    report = guarantee_report(3, 2, 1, 2.5, 1.5, 0.5)
    assert report.satisfied
    assert report.margin == pytest.approx(0.5 - 2.5 / 48)
    assert report.csv_row()[0] == 3
    failed = guarantee_report(0, 2, 1, 2.5, 1.5, 0.0)
    assert not failed.satisfied


def test_ic_audit_peer_max_on_point_masses(engine):
    report = ic_audit({"mech": "peer_max", "k": 1}, [Degenerate(1.0), Degenerate(2.0)], 2, engine=engine)
    assert report.max_regret <= 1e-9
    assert report.profiles_checked == 4
    assert report.ok


def test_ic_audit_fixed_fee(engine):
    mechanism = TamMechanism([1.0, 0.0], "spa", engine)
    report = ic_audit(mechanism, [Degenerate(2.0), Degenerate(0.0)], 2, engine=engine)
    assert report.max_regret <= 1e-9
    assert report.min_truthful_utility >= 0


def test_ic_audit_zero_fee_second_price(engine):
    members = [Discrete(((3.0, 0.5), (1.0, 0.5))), Degenerate(2.0), Discrete(((4.0, 0.25), (0.0, 0.75)))]
    report = ic_audit(TamMechanism([0.0, 0.0], engine=engine), members, 2, engine=engine)
    assert report.ok
    assert report.witness is not None


def test_ic_audit_single_member_class(engine):
    report = ic_audit(IidTam(engine), [Degenerate(1.0)], 2, engine=engine)
    assert report.max_regret == 0.0
    assert report.witness is None


def test_ic_audit_rejects_empty_class(engine):
    with pytest.raises(DomainError):
        ic_audit({"mech": "iid_tam"}, [], 2, engine=engine)


def test_arrangement_identity_beats_swap(engine, f1):
    instance = Instance((f1, Degenerate(2.0)))
    report = arrangement_report(TamMechanism([0.0, 0.0], engine=engine), instance, 0, 2,
                                reported=Discrete(((4.0, 0.5), (0.0, 0.5))), engine=engine)
    assert report.identity_utility == pytest.approx(0.5)
    assert report.best_permutation == (0, 1)
    assert report.optimal


def test_arrangement_single_cell(engine, i1):
    assert arrangement_audit(PeerMax(1, engine), i1.with_buyers([Degenerate(3.0), Degenerate(2.0)]),
                             0, 1, engine=engine)


def test_arrangement_off_grid(engine, i1):
    with pytest.raises(ParameterError):
        arrangement_audit(PeerMax(1, engine), i1, 0, 3, engine=engine)
    with pytest.raises(ParameterError):
        arrangement_audit(PeerMax(1, engine), i1, 0, 7, engine=engine)


@pytest.mark.parametrize("n", [16, 64, 256, 1024])
def test_posted_price_cap(n):
    for kind in ("general", "regular"):
        assert posted_price_cap(hard_family(kind, n)).ok


def test_posted_price_cap_values():
    report = posted_price_cap(hard_family("general", 64))
    assert report.cap == pytest.approx(0.25)
    assert report.bound == pytest.approx(1.0 / 3.0)
    single = posted_price_cap(hard_family("general", 16))
    assert single.cap == pytest.approx(hard_family("general", 16).delta)


def test_binomial_lower_bound():
    assert binomial_lower_bound(0, 10, 0.99) == 0.0
    assert binomial_lower_bound(1, 1, 0.99) == pytest.approx(0.01)
    assert binomial_lower_bound(1800, 2000, 0.99) > 0.85


def test_concentration_audit_small_run():
    report = concentration_audit(64, 200, np.random.default_rng(1))
    assert report.frequency >= 0.5
    assert report.successes <= report.trials


def test_concentration_audit_errors():
    with pytest.raises(DomainError):
        concentration_audit(64, 0, np.random.default_rng(0))
    with pytest.raises(ParameterError) as info:
        concentration_audit(16, 10, np.random.default_rng(0))
    assert "L >= 2" in str(info.value)


def test_upper_bound_audit_with_infinite_fees(engine):
    mechanism = TamMechanism([math.inf] * 16, engine=engine)
    report = upper_bound_audit(mechanism, 16, 5, np.random.default_rng(0), engine)
    assert report.mean_rev == 0.0
    assert report.ok


def test_upper_bound_audit_peer_max_small(engine):
    report = upper_bound_audit(PeerMax(1, engine), 16, 20, np.random.default_rng(4), engine)
    assert report.ceiling == pytest.approx(2 * 16 * 0.5)
    assert report.ok


def test_degenerate_audit(engine):
    report = degenerate_audit(PeerMax(1, engine), 3, engine=engine)
    assert report.wel == pytest.approx(1.0)
    assert report.base_rev == pytest.approx(1.0)
    assert report.ok


def test_sweep_empty():
    result = sweep(SweepConfig(count=0))
    assert result.reports == []
    assert result.summary.violations == 0
    assert result.summary.min_margin is None


def test_sweep_is_deterministic_across_workers(engine):
    config = SweepConfig(count=20, K=(1, 2), seed=7)
    serial = sweep(config, engine, workers=1)
    threaded = sweep(config, engine, workers=3)
    assert serial.to_dict() == threaded.to_dict()
    assert serial.summary.violations == 0


def test_sweep_multi_unit(engine):
    result = sweep(SweepConfig(count=20, n_range=(2, 4), K=(1, 2), model="vcg", seed=3), engine)
    assert result.summary.violations == 0


@pytest.mark.parametrize("kwargs", [
    {"count": -1},
    {"count": 1, "n_range": (1, 3)},
    {"count": 1, "k_range": (0, 2)},
    {"count": 1, "K": (0,)},
])
def test_sweep_config_validation(kwargs):
    with pytest.raises((DomainError, ParameterError)):
        SweepConfig(**kwargs)
