#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Bid Rules Module
Bid-reporting base mechanisms: single-item second price and multi-unit VCG

Both rules are written over a batch of bid profiles (one row per profile)
so that the exact engine, the Monte Carlo engine and single-profile calls
share one implementation. Bids are compared exactly and ties go to the
lowest buyer index in both rules, so VCG with one unit and unit demands
is the second-price auction.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Tuple

import numpy as np

from .errors import ParameterError


class BaseMechanism(str, Enum):
    """Bid-reporting mechanism a threshold-augmented mechanism runs on"""

    SPA = "spa"
    VCG = "vcg"

    @classmethod
    def parse(cls, name) -> "BaseMechanism":
        if isinstance(name, cls):
            return name
        aliases = {"spa": cls.SPA, "single_item_spa": cls.SPA,
                   "vcg": cls.VCG, "multi_unit_vcg": cls.VCG}
        try:
            return aliases[str(name).lower()]
        except KeyError:
            raise ParameterError(f"unknown base mechanism {name!r}", "base")


@dataclass(frozen=True)
class BidOutcome:
    """Allocation (units) and payment of every buyer on one bid profile"""

    alloc: Tuple[float, ...]
    pay: Tuple[float, ...]


@dataclass
class BatchOutcome:
    """
    Outcomes over a batch of profiles

    ``others_opt[:, i]`` is the optimal welfare of the others with buyer i
    removed (the max of the others' bids in the single-item case).
    """

    alloc: np.ndarray
    pay: np.ndarray
    others_opt: np.ndarray

    def welfare_share(self, bids: np.ndarray) -> np.ndarray:
        return self.alloc * bids


def spa_batch(bids: np.ndarray) -> BatchOutcome:
    """Second-price auction on every row of ``bids``"""
    bids = np.asarray(bids, dtype=float)
    rows, n = bids.shape
    row_index = np.arange(rows)

    winner = np.argmax(bids, axis=1)
    top = bids[row_index, winner]

    alloc = np.zeros_like(bids)
    alloc[row_index, winner] = 1.0

    without_winner = bids.copy()
    without_winner[row_index, winner] = -np.inf
    second = without_winner.max(axis=1)

    pay = np.zeros_like(bids)
    pay[row_index, winner] = second

    # max over j != i: the runner-up for the winner, the top for everyone else
    others_opt = np.repeat(top[:, None], n, axis=1)
    others_opt[row_index, winner] = second

    return BatchOutcome(alloc=alloc, pay=pay, others_opt=others_opt)


def _greedy_fill(sorted_demands: np.ndarray, m: float) -> np.ndarray:
    filled_before = np.cumsum(sorted_demands, axis=1) - sorted_demands
    return np.clip(m - filled_before, 0.0, sorted_demands)


def vcg_batch(bids: np.ndarray, m: float, demands: Sequence[float]) -> BatchOutcome:
    """
    Multi-unit VCG with demand capacities on every row of ``bids``

    Greedy fill by descending bid is the welfare argmax over
    {x : sum x <= m, 0 <= x_i <= d_i}. Payment of i is the others' optimum
    without i minus the others' welfare under the chosen allocation.
    """
    bids = np.asarray(bids, dtype=float)
    rows, n = bids.shape
    d = np.asarray(demands, dtype=float)
    row_index = np.arange(rows)[:, None]

    order = np.argsort(-bids, axis=1, kind="stable")
    sorted_bids = bids[row_index, order]
    sorted_demands = np.broadcast_to(d, (rows, n))[row_index, order]

    alloc = np.zeros_like(bids)
    alloc[row_index, order] = _greedy_fill(sorted_demands, m)
    welfare = (alloc * bids).sum(axis=1)

    others_opt = np.empty_like(bids)
    for i in range(n):
        removed = np.where(order == i, 0.0, sorted_demands)
        others_opt[:, i] = (_greedy_fill(removed, m) * sorted_bids).sum(axis=1)

    others_welfare = welfare[:, None] - alloc * bids
    pay = np.maximum(others_opt - others_welfare, 0.0)
    return BatchOutcome(alloc=alloc, pay=pay, others_opt=others_opt)


def run_batch(base: BaseMechanism, bids: np.ndarray, m: float = 1.0,
              demands: Sequence[float] = None) -> BatchOutcome:
    """Dispatch a batch of profiles to the base rule"""
    if BaseMechanism.parse(base) is BaseMechanism.SPA:
        return spa_batch(bids)
    bids = np.asarray(bids, dtype=float)
    if demands is None:
        demands = np.ones(bids.shape[1])
    return vcg_batch(bids, m, demands)


def spa_outcome(bids: Sequence[float]) -> BidOutcome:
    """
    Second-price auction on one bid profile

    Args:
        bids: Non-negative bids, at least two

    Returns:
        BidOutcome: Lowest-index top bidder wins and pays the highest other bid
    """
    bids = np.asarray(bids, dtype=float)
    if bids.ndim != 1 or bids.size < 2:
        raise ParameterError(f"second-price auction needs at least 2 bids, got {bids.size}", "bids")
    if np.any(bids < 0):
        raise ParameterError("bids must be non-negative", "bids")
    batch = spa_batch(bids[None, :])
    return BidOutcome(tuple(batch.alloc[0].tolist()), tuple(batch.pay[0].tolist()))


def vcg_outcome(bids: Sequence[float], m: float, d: Sequence[float]) -> BidOutcome:
    """VCG on one bid profile with supply ``m`` and demand capacities ``d``"""
    bids = np.asarray(bids, dtype=float)
    if bids.ndim != 1 or bids.size != len(d):
        raise ParameterError(f"{bids.size} bids but {len(d)} demand capacities", "d")
    if m <= 0 or any(cap <= 0 for cap in d):
        raise ParameterError("supply and demand capacities must be positive", "m")
    batch = vcg_batch(bids[None, :], m, d)
    return BidOutcome(tuple(batch.alloc[0].tolist()), tuple(batch.pay[0].tolist()))
