#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Expectation Engine Module
Exact and Monte Carlo computation of welfare, payments and ex-ante utilities

Three ways to get the per-buyer quantities (w_i, s_i, r_i):
  - joint-support enumeration (any base mechanism, capped),
  - order statistics over the merged support (second price only, any n),
  - Monte Carlo with common random numbers.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .bid_rules import BaseMechanism, run_batch
from .config import Config, config as default_config
from .distributions import Distribution, Instance, as_discrete, sample_many
from .errors import CapacityError, DomainError, ParameterError

logger = logging.getLogger(__name__)


@dataclass
class PerBuyerStats:
    """
    Per-buyer expectations under one base mechanism

    w: expected welfare contribution; s: expected base payment;
    r: expected optimal welfare of the others (i removed).
    """

    w: np.ndarray
    s: np.ndarray
    r: np.ndarray
    model: BaseMechanism = BaseMechanism.SPA
    method: str = "exact"
    stderr: Optional[Dict[str, object]] = None

    @property
    def n(self) -> int:
        return len(self.w)

    @property
    def wel(self) -> float:
        return float(math.fsum(self.w))

    @property
    def base_rev(self) -> float:
        return float(math.fsum(self.s))

    @property
    def u_base(self) -> np.ndarray:
        """Truthful base-mechanism ex-ante utility w_i - s_i"""
        return self.w - self.s

    def accounting_gaps(self) -> np.ndarray:
        """|r_i - s_i - sum_{j != i} w_j| per buyer"""
        return np.abs(self.r - self.s - (self.wel - self.w))

    def chain_violation(self) -> float:
        """
        Largest violation of s_i <= w_i and base_rev <= r_i <= wel <= r_i + w_i <= 2 wel

        Returns:
            float: 0 when every inequality holds, else the worst gap
        """
        wel, base_rev = self.wel, self.base_rev
        gaps = [
            self.s - self.w,
            base_rev - self.r,
            self.r - wel,
            wel - (self.r + self.w),
            (self.r + self.w) - 2 * wel,
        ]
        return float(max(0.0, max(float(np.max(g)) for g in gaps)))

    def to_dict(self) -> dict:
        result = {
            "model": self.model.value,
            "method": self.method,
            "w": self.w.tolist(),
            "s": self.s.tolist(),
            "r": self.r.tolist(),
            "wel": self.wel,
            "base_rev": self.base_rev,
        }
        if self.stderr is not None:
            result["stderr"] = {key: (value.tolist() if isinstance(value, np.ndarray) else value)
                                for key, value in self.stderr.items()}
        return result


@dataclass(frozen=True)
class CouplingCell:
    """Quantile cell with the buyer's true value and bid under the identity arrangement"""

    measure: float
    true_value: float
    bid_value: float


@dataclass
class BidResponse:
    """Expected allocation and payment of one buyer for each of its candidate bids"""

    bids: np.ndarray
    alloc: np.ndarray
    pay: np.ndarray


def _joint_support(laws, cap: int) -> Tuple[np.ndarray, np.ndarray]:
    """Enumerate every joint profile of independent discrete laws"""
    size = 1
    for law in laws:
        size *= len(law.atoms)
    if size > cap:
        raise CapacityError(size, cap)
    if not laws:
        return np.zeros((1, 0)), np.ones(1)
    value_grids = np.meshgrid(*[law.values for law in laws], indexing="ij")
    prob_grids = np.meshgrid(*[law.probs for law in laws], indexing="ij")
    values = np.stack([grid.reshape(-1) for grid in value_grids], axis=1)
    probs = np.prod(np.stack([grid.reshape(-1) for grid in prob_grids], axis=1), axis=1)
    return values, probs


def _exclusive_products(factors: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Prefix and suffix products along axis 0

    prefix[i] = prod_{j < i} factors[j]; suffix[i] = prod_{j > i} factors[j].
    """
    ones = np.ones_like(factors[:1])
    prefix = np.concatenate([ones, np.cumprod(factors, axis=0)[:-1]], axis=0)
    suffix = np.concatenate([np.cumprod(factors[::-1], axis=0)[::-1][1:], ones], axis=0)
    return prefix, suffix


class ExpectationEngine:
    """
    Computes benchmarks and ex-ante utilities for an instance
    """

    def __init__(self, config: Config = None):
        """
        Initialize engine

        Args:
            config: Configuration object (defaults to the shared instance)
        """
        self.config = config or default_config

    @property
    def cap(self) -> int:
        return self.config.EXACT_CAP

    # === PER-BUYER STATISTICS ===

    def stats(self, instance: Instance, model="spa", method: str = "auto") -> PerBuyerStats:
        """
        Exact statistics with the cheapest applicable method

        Args:
            instance: Discrete instance
            model: Base mechanism
            method: auto, enumeration or order_statistics

        Returns:
            PerBuyerStats: Exact per-buyer quantities
        """
        model = BaseMechanism.parse(model)
        if method == "enumeration":
            return self.stats_exact(instance, model)
        if method == "order_statistics":
            return self.stats_order_statistics(instance)
        if method != "auto":
            raise ParameterError(f"unknown exact method {method!r}", "method")

        laws = [as_discrete(F) for F in instance.buyers]
        size = math.prod(len(law.atoms) for law in laws)
        if size <= self.cap:
            return self.stats_exact(instance, model)
        if model is BaseMechanism.SPA:
            logger.debug(f"🔢 Joint support {size} above cap, using order statistics")
            return self.stats_order_statistics(instance)
        raise CapacityError(size, self.cap)

    def stats_exact(self, instance: Instance, model="spa") -> PerBuyerStats:
        """
        Exact statistics by joint-support enumeration

        Args:
            instance: Instance with Discrete/Degenerate buyers
            model: spa (single-item) or vcg (multi-unit)

        Returns:
            PerBuyerStats: Sums over every joint profile
        """
        model = BaseMechanism.parse(model)
        self._check_model(instance, model)
        laws = [as_discrete(F) for F in instance.buyers]
        values, probs = _joint_support(laws, self.cap)

        outcome = run_batch(model, values, instance.m, instance.demands)
        w = probs @ outcome.welfare_share(values)
        s = probs @ outcome.pay
        r = probs @ outcome.others_opt
        return PerBuyerStats(w=w, s=s, r=r, model=model, method="exact")

    def stats_order_statistics(self, instance: Instance) -> PerBuyerStats:
        """
        Exact second-price statistics from CDF products

        Buyer i wins at value t iff v_i = t, every lower-index buyer is
        strictly below t and every higher-index buyer is at most t. The
        others' maximum on that event has capped CDFs, which gives s_i
        without enumerating profiles. One winning value at a time, so
        memory stays linear in n * S for S merged support points.
        """
        model = BaseMechanism.SPA
        self._check_model(instance, model)
        laws = [as_discrete(F) for F in instance.buyers]
        grid = np.unique(np.concatenate([law.values for law in laws]))
        size = len(grid)
        work = len(laws) * size * size
        if work > self.config.ORDER_STATS_CAP:
            raise CapacityError(work, self.config.ORDER_STATS_CAP, "order-statistics steps")

        at_most = np.stack([law.cdf(grid) for law in laws])                # P[v_j <= t_k]
        below = np.concatenate([np.zeros((len(laws), 1)), at_most[:, :-1]], axis=1)  # P[v_j < t_k]
        pmf = at_most - below

        win = np.empty_like(at_most)
        others_max_on_win = np.empty_like(at_most)
        for k in range(size):
            # P[v_j <= min(t_l, cap)] with cap "< t_k" for lower index, "<= t_k" for higher
            l_below_k = np.arange(size) < k
            capped_lower = np.where(l_below_k, at_most, below[:, k:k + 1])
            capped_upper = np.where(l_below_k, at_most, at_most[:, k:k + 1])
            prefix_lower, _ = _exclusive_products(capped_lower)
            _, suffix_upper = _exclusive_products(capped_upper)
            joint = prefix_lower * suffix_upper                            # [i, l]
            win[:, k] = joint[:, k]
            others_max_on_win[:, k] = np.diff(joint, axis=1, prepend=0.0) @ grid

        w = np.sum(pmf * grid[None, :] * win, axis=1)
        s = np.sum(pmf * others_max_on_win, axis=1)

        prefix, suffix = _exclusive_products(at_most)
        others_cdf = prefix * suffix
        r = np.diff(others_cdf, axis=1, prepend=0.0) @ grid
        return PerBuyerStats(w=w, s=s, r=r, model=model, method="order_statistics")

    def stats_mc(self, instance: Instance, model="spa", samples: int = None,
                 stream: np.random.Generator = None) -> PerBuyerStats:
        """
        Monte Carlo estimate with standard errors

        Args:
            instance: Any instance (parametric buyers allowed)
            model: Base mechanism
            samples: Number of joint draws
            stream: Seeded generator

        Returns:
            PerBuyerStats: Sample means with per-field standard errors
        """
        model = BaseMechanism.parse(model)
        self._check_model(instance, model)
        samples = self.config.DEFAULT_SAMPLES if samples is None else int(samples)
        if samples < 1:
            raise DomainError(f"samples {samples} must be at least 1", "samples")
        if stream is None:
            stream = np.random.default_rng(self.config.DEFAULT_SEED)

        values = np.stack([sample_many(F, samples, stream) for F in instance.buyers], axis=1)
        outcome = run_batch(model, values, instance.m, instance.demands)

        paths = {
            "w": outcome.welfare_share(values),
            "s": outcome.pay,
            "r": outcome.others_opt,
        }
        paths["wel"] = paths["w"].sum(axis=1)
        paths["base_rev"] = paths["s"].sum(axis=1)

        ddof = 1 if samples > 1 else 0
        stderr = {key: np.std(path, axis=0, ddof=ddof) / math.sqrt(samples) for key, path in paths.items()}
        stderr["wel"] = float(stderr["wel"])
        stderr["base_rev"] = float(stderr["base_rev"])
        return PerBuyerStats(
            w=paths["w"].mean(axis=0),
            s=paths["s"].mean(axis=0),
            r=paths["r"].mean(axis=0),
            model=model,
            method="monte_carlo",
            stderr=stderr,
        )

    def buyer_base_utility(self, instance: Instance, i: int, model="spa") -> float:
        """Truthful base-mechanism utility w_i - s_i of buyer i under ``instance``"""
        stats = self.stats(instance, model)
        return float(stats.u_base[i])

    # === QUANTILE COUPLING AND EX-ANTE UTILITY ===

    def quantile_coupling(self, F: Distribution, B: Distribution) -> List[CouplingCell]:
        """
        Identity-in-quantile coupling of a true law and a reported law

        Args:
            F: True value distribution
            B: Reported bid distribution

        Returns:
            list: Cells partitioning [0, 1] with (measure, v(q), b(q))
        """
        true_law, bid_law = as_discrete(F), as_discrete(B)
        points = np.unique(np.concatenate([true_law.tail_breakpoints, bid_law.tail_breakpoints]))
        tolerance = self.config.PROB_TOLERANCE
        merged = []
        for point in points:
            if merged and point - merged[-1] <= tolerance:
                merged[-1] = point
            else:
                merged.append(point)
        merged[-1] = 1.0

        cells = []
        lower = 0.0
        for upper in merged:
            if upper - lower > tolerance:
                cells.append(CouplingCell(
                    measure=upper - lower,
                    true_value=float(true_law.quantile(upper)),
                    bid_value=float(bid_law.quantile(upper)),
                ))
            lower = upper
        return cells

    def bid_response(self, base, i: int, bids: Sequence[float], reported: Instance) -> BidResponse:
        """
        Expected allocation and payment of buyer i for each candidate bid

        The others bid according to their reported laws in ``reported``.
        """
        base = BaseMechanism.parse(base)
        self._check_model(reported, base)
        bids = np.asarray(bids, dtype=float)
        others = [as_discrete(F) for j, F in enumerate(reported.buyers) if j != i]
        if len(bids) * math.prod(len(law.atoms) for law in others) > self.cap:
            raise CapacityError(len(bids) * math.prod(len(law.atoms) for law in others), self.cap)
        other_values, other_probs = _joint_support(others, self.cap)

        rows = len(other_probs)
        tiled = np.repeat(other_values[None, :, :], len(bids), axis=0)
        own = np.broadcast_to(bids[:, None, None], (len(bids), rows, 1))
        profiles = np.concatenate([tiled[:, :, :i], own, tiled[:, :, i:]], axis=2)
        profiles = profiles.reshape(len(bids) * rows, reported.n)

        outcome = run_batch(base, profiles, reported.m, reported.demands)
        alloc = outcome.alloc[:, i].reshape(len(bids), rows) @ other_probs
        pay = outcome.pay[:, i].reshape(len(bids), rows) @ other_probs
        return BidResponse(bids=bids, alloc=alloc, pay=pay)

    def exante_utility_exact(self, base, i: int, reported: Instance, true_F: Distribution) -> float:
        """
        Ex-ante utility of buyer i under the identity arrangement

        Args:
            base: Base mechanism
            i: Buyer index
            reported: Reported profile (buyer i's entry is its bid law)
            true_F: Buyer i's true value law

        Returns:
            float: E[v(q) x_i] - E[p_i] over the coupling cells and the others' reports
        """
        cells = self.quantile_coupling(true_F, reported.buyers[i])
        response = self.bid_response(base, i, [cell.bid_value for cell in cells], reported)
        measures = np.array([cell.measure for cell in cells])
        true_values = np.array([cell.true_value for cell in cells])
        return float(measures @ (true_values * response.alloc - response.pay))

    @staticmethod
    def _check_model(instance: Instance, model: BaseMechanism):
        if model is BaseMechanism.SPA and not instance.is_single_item:
            raise ParameterError(
                "second-price model needs a single-item instance (m = 1, all demands 1); use vcg",
                "model",
            )


# === MODULE-LEVEL SHORTCUTS ===

def stats_exact(instance: Instance, model="spa", config: Config = None) -> PerBuyerStats:
    return ExpectationEngine(config).stats_exact(instance, model)


def stats_mc(instance: Instance, model="spa", samples: int = None,
             stream: np.random.Generator = None, config: Config = None) -> PerBuyerStats:
    return ExpectationEngine(config).stats_mc(instance, model, samples, stream)


def quantile_coupling(F: Distribution, B: Distribution, config: Config = None) -> List[CouplingCell]:
    return ExpectationEngine(config).quantile_coupling(F, B)


def exante_utility_exact(base, i: int, reported: Instance, true_F: Distribution,
                         config: Config = None) -> float:
    return ExpectationEngine(config).exante_utility_exact(base, i, reported, true_F)
