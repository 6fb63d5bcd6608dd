#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Config Tests
"""

from distribution_auctions.config import Config


def test_defaults_are_valid():
    config = Config()
    assert config.EXACT_CAP > 0
    assert config.validate_settings()


def test_cap_from_environment(monkeypatch):
    monkeypatch.setenv("AUCTION_EXACT_CAP", "500")
    assert Config().EXACT_CAP == 500


def test_bad_environment_cap_is_ignored(monkeypatch):
    monkeypatch.setenv("AUCTION_EXACT_CAP", "lots")
    assert Config().EXACT_CAP == 1_000_000


def test_update_and_validate():
    config = Config()
    config.update_engine_settings(cap=10)
    assert config.get_engine_config()["cap"] == 10
    config.update_engine_settings(cap=0)
    assert not config.validate_settings()


def test_report_echo():
    echo = Config().to_dict()
    assert set(echo) == {"engine", "audit"}
    assert echo["audit"]["regret_tolerance"] == 1e-9


def test_order_statistics_cap_is_validated():
    config = Config()
    assert config.get_engine_config()["order_statistics_cap"] == config.ORDER_STATS_CAP
    config.ORDER_STATS_CAP = 0
    assert not config.validate_settings()
