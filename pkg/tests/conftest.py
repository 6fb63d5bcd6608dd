#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Shared test fixtures
"""

import sys
from pathlib import Path

import numpy as np
import pytest

PROJECT_ROOT = Path(__file__).resolve().parents[1]
SRC_DIR = PROJECT_ROOT / "src"
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))

from distribution_auctions.config import Config
from distribution_auctions.distributions import Degenerate, Discrete, Instance
from distribution_auctions.engine import ExpectationEngine

I1_JSON = (
    '{"m":1,"demands":[1,1],"buyers":['
    '{"kind":"discrete","support":[{"value":3,"prob":0.5},{"value":1,"prob":0.5}]},'
    '{"kind":"degenerate","value":2}]}'
)


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running reproduction checks")


@pytest.fixture
def config():
    return Config()


@pytest.fixture
def engine(config):
    return ExpectationEngine(config)


@pytest.fixture
def f1():
    return Discrete(((3.0, 0.5), (1.0, 0.5)))


@pytest.fixture
def i1(f1):
    """Two buyers: {3, 1} w.p. 1/2 each against a point mass at 2"""
    return Instance((f1, Degenerate(2.0)))


@pytest.fixture
def i1_json():
    return I1_JSON


@pytest.fixture
def three_unit_values():
    """Known values (5, 3, 2) with two units and unit demands"""
    return Instance((Degenerate(5.0), Degenerate(3.0), Degenerate(2.0)), m=2.0)


@pytest.fixture
def stream():
    return np.random.default_rng(7)
