#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Audits Module
Numerical checks of the incentive and revenue guarantees on concrete instances
"""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats as scipy_stats

from .bid_rules import BaseMechanism
from .distributions import Degenerate, Distribution, Instance, as_discrete
from .engine import ExpectationEngine
from .errors import DomainError, ParameterError
from .generators import (
    HardFamily,
    draw_family_indices,
    hard_family,
    make_hard_instance,
    make_tied_pair_instance,
    random_discrete_instance,
    random_multi_unit_instance,
)
from .mechanisms import (
    DistributionMechanism,
    induce_bid_mechanism,
    mechanism_from_config,
    peer_max_revenue,
    peer_welfare_revenue,
)

logger = logging.getLogger(__name__)

MechanismLike = Union[DistributionMechanism, dict]


def _as_mechanism(mechanism: MechanismLike, engine: ExpectationEngine) -> DistributionMechanism:
    if isinstance(mechanism, DistributionMechanism):
        return mechanism
    return mechanism_from_config(mechanism, engine)


# === EITHER-OR GUARANTEE ===

def either_or_bound(wel: float, base_rev: float, K: int, n: int) -> float:
    """min{wel / (24 (K + log2 n)), 2^K base_rev}"""
    if wel < 0 or base_rev < 0:
        raise DomainError("wel and base_rev must be non-negative", "wel")
    if K < 1 or n < 2:
        raise ParameterError(f"need K >= 1 and n >= 2, got K={K}, n={n}", "k")
    return min(wel / (24.0 * (K + math.log2(n))), 2.0 ** K * base_rev)


@dataclass
class GuaranteeReport:
    """Either-or guarantee check on one instance"""

    instance_id: int
    n: int
    K: int
    wel: float
    base_rev: float
    bound: float
    revenue: float
    margin: float
    satisfied: bool

    CSV_HEADER = ("id", "n", "wel", "base_rev", "bound", "revenue", "margin", "satisfied")

    def csv_row(self) -> list:
        return [self.instance_id, self.n, self.wel, self.base_rev, self.bound,
                self.revenue, self.margin, self.satisfied]

    def to_dict(self) -> dict:
        return asdict(self)


def guarantee_report(instance_id: int, n: int, K: int, wel: float, base_rev: float,
                     revenue: float, tolerance: float = 1e-9) -> GuaranteeReport:
    bound = either_or_bound(wel, base_rev, K, n)
    margin = revenue - bound
    return GuaranteeReport(instance_id, n, K, wel, base_rev, bound, revenue, margin, margin >= -tolerance)


# === INCENTIVE COMPATIBILITY ===

@dataclass
class IcAuditReport:
    """Worst deviation gain over a finite class, plus the ex-ante IR check"""

    max_regret: float
    witness: Optional[dict]
    min_truthful_utility: float
    profiles_checked: int
    ok: bool

    def to_dict(self) -> dict:
        return asdict(self)


def ic_audit(mechanism: MechanismLike, distribution_class: Sequence[Distribution], n: int,
             m: float = 1.0, demands: Sequence[float] = None,
             engine: ExpectationEngine = None) -> IcAuditReport:
    """
    Exhaustive deviation search within a finite class

    For every true profile in class^n, every buyer and every other class
    member as its report, compares the deviation utility with the
    truthful one under the identity arrangement.

    Args:
        mechanism: Mechanism or its JSON config
        distribution_class: Finite list of discrete laws
        n: Number of buyers
        m: Supply
        demands: Demand capacities

    Returns:
        IcAuditReport: Max regret with the (profile, buyer, deviation) witness
    """
    engine = engine or ExpectationEngine()
    mechanism = _as_mechanism(mechanism, engine)
    members = list(distribution_class)
    if not members:
        raise DomainError("distribution class is empty", "class")
    tolerance = engine.config.REGRET_TOLERANCE

    outcomes = {}

    def reported_at(profile):
        key = tuple(profile)
        if key not in outcomes:
            instance = Instance(tuple(members[k] for k in key), m, tuple(demands or ()))
            outcomes[key] = (instance, mechanism.outcome(instance))
        return outcomes[key]

    max_regret = -math.inf
    witness = None
    min_truthful = math.inf
    profiles = list(itertools.product(range(len(members)), repeat=n))
    for profile in profiles:
        instance, outcome = reported_at(profile)
        for i, own in enumerate(profile):
            true_F = members[own]
            truthful = mechanism.utility(i, instance, true_F, outcome)
            min_truthful = min(min_truthful, truthful)
            for deviation in range(len(members)):
                if deviation == own:
                    continue
                deviated = list(profile)
                deviated[i] = deviation
                dev_instance, dev_outcome = reported_at(deviated)
                regret = mechanism.utility(i, dev_instance, true_F, dev_outcome) - truthful
                if regret > max_regret:
                    max_regret = regret
                    witness = {"profile": list(profile), "buyer": i, "deviation": deviation}

    if max_regret == -math.inf:
        max_regret = 0.0
    ok = max_regret <= tolerance and min_truthful >= -tolerance
    if not ok:
        logger.warning(f"⚠️ IC audit failed for {mechanism!r}: regret {max_regret:.3g} at {witness}")
    return IcAuditReport(float(max_regret), witness, float(min_truthful), len(profiles), ok)


# === ARRANGEMENTS ===

@dataclass
class ArrangementReport:
    identity_utility: float
    best_utility: float
    best_permutation: Tuple[int, ...]
    optimal: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _check_grid(F: Distribution, cells: int, name: str):
    scaled = as_discrete(F).tail_breakpoints * cells
    if np.any(np.abs(scaled - np.round(scaled)) > 1e-9):
        raise ParameterError(f"{name} has quantile breakpoints off the {cells}-cell grid", name)


def arrangement_report(mechanism: MechanismLike, instance: Instance, i: int, cells: int,
                       reported: Distribution = None, engine: ExpectationEngine = None) -> ArrangementReport:
    """
    Compare every measure-preserving permutation of buyer i's quantile cells

    Args:
        mechanism: Mechanism or its JSON config
        instance: True profile (the others report truthfully)
        i: Audited buyer
        cells: Number of equal quantile cells (1..6)
        reported: Buyer i's report; defaults to its true law

    Returns:
        ArrangementReport: Identity utility against the best permutation
    """
    engine = engine or ExpectationEngine()
    mechanism = _as_mechanism(mechanism, engine)
    if not 1 <= cells <= 6:
        raise ParameterError(f"cells = {cells} must be between 1 and 6", "cells")
    true_F = instance.buyers[i]
    bid_B = reported if reported is not None else true_F
    _check_grid(true_F, cells, "true")
    _check_grid(bid_B, cells, "reported")

    buyers = list(instance.buyers)
    buyers[i] = bid_B
    reported_instance = instance.with_buyers(buyers)

    upper = np.arange(1, cells + 1) / cells
    true_values = as_discrete(true_F).quantile(upper)
    bids = as_discrete(bid_B).quantile(upper)
    alloc, pay = mechanism.allocation_weights(i, reported_instance, bids)

    identity = tuple(range(cells))
    results = {}
    for permutation in itertools.permutations(identity):
        index = list(permutation)
        results[permutation] = float(np.mean(true_values * alloc[index] - pay[index]))
    best = max(results, key=results.get)
    tolerance = engine.config.REGRET_TOLERANCE
    return ArrangementReport(
        identity_utility=results[identity],
        best_utility=results[best],
        best_permutation=best,
        optimal=results[identity] >= results[best] - tolerance,
    )


def arrangement_audit(mechanism: MechanismLike, instance: Instance, i: int, cells: int,
                      reported: Distribution = None, engine: ExpectationEngine = None) -> bool:
    """True iff the identity arrangement attains the maximum ex-ante utility"""
    return arrangement_report(mechanism, instance, i, cells, reported, engine).optimal


# === HARD-FAMILY AUDITS ===

@dataclass
class PostedPriceReport:
    cap: float
    bound: float
    ok: bool

    def to_dict(self) -> dict:
        return asdict(self)


def posted_price_cap(family: HardFamily) -> PostedPriceReport:
    """
    Best per-buyer posted-price revenue against the family mixture

    max over j of 2^-j times the weight of members 1..j, checked against
    2 delta. Both scale by (1 + ln(1/epsilon)) for the regular kind.
    """
    cumulative = np.cumsum(family.weights)
    exponents = np.arange(1, family.L + 1)
    cap = float(np.max(cumulative / 2.0 ** exponents))
    bound = 2.0 * family.delta
    if family.kind == "regular":
        factor = 1.0 + math.log(1.0 / family.epsilon)
        cap, bound = cap * factor, bound * factor
    return PostedPriceReport(cap=cap, bound=bound, ok=cap <= bound + 1e-12)


@dataclass
class ConcentrationReport:
    kind: str
    n: int
    trials: int
    successes: int
    frequency: float
    lower_bound: float
    confidence: float
    ok: bool

    def to_dict(self) -> dict:
        return asdict(self)


def binomial_lower_bound(successes: int, trials: int, confidence: float) -> float:
    """One-sided Clopper-Pearson lower confidence bound"""
    if successes == 0:
        return 0.0
    return float(scipy_stats.beta.ppf(1.0 - confidence, successes, trials - successes + 1))


def concentration_audit(n: int, trials: int, stream: np.random.Generator, kind: str = "general",
                        confidence: float = 0.99) -> ConcentrationReport:
    """
    Frequency of the concentration event over draws from the hard family

    general: sum_i E[v_i] >= (2/3) n delta L.
    regular: sum_j n_j 2^-j <= (4/3) n delta L and
             sum_{j <= ceil(L/3)} n_j 2^-j >= (1/2) n delta ceil(L/3),
             with n_j the number of buyers drawing member j.
    """
    if trials < 1:
        raise DomainError(f"trials = {trials} must be at least 1", "trials")
    family = hard_family(kind, n)
    if family.L < 2:
        raise ParameterError(f"n = {n} gives L = {family.L}; the concentration event needs L >= 2 (n >= 64)", "n")

    exponents = draw_family_indices(family, (trials, n), stream)
    contributions = 2.0 ** (-exponents.astype(float))
    scale = n * family.delta
    if kind == "general":
        event = contributions.sum(axis=1) >= (2.0 / 3.0) * scale * family.L
    else:
        L1 = math.ceil(family.L / 3)
        upper = contributions.sum(axis=1) <= (4.0 / 3.0) * scale * family.L
        lower = np.where(exponents <= L1, contributions, 0.0).sum(axis=1) >= 0.5 * scale * L1
        event = upper & lower

    successes = int(event.sum())
    lower_bound = binomial_lower_bound(successes, trials, confidence)
    report = ConcentrationReport(kind, n, trials, successes, successes / trials, lower_bound,
                                 confidence, lower_bound >= 0.5)
    logger.info(f"📈 Concentration ({kind}, n={n}): {successes}/{trials}, lower bound {lower_bound:.3f}")
    return report


@dataclass
class UpperBoundReport:
    n: int
    trials: int
    mean_rev: float
    stderr: float
    ceiling: float
    ok: bool
    benchmark_mean: float
    benchmark_floor: float
    benchmark_ok: bool

    def to_dict(self) -> dict:
        return asdict(self)


def upper_bound_audit(mechanism: MechanismLike, n: int, trials: int, stream: np.random.Generator,
                      engine: ExpectationEngine = None) -> UpperBoundReport:
    """
    Mean revenue over random hard instances against the 2 n delta ceiling

    Also averages the benchmark min{3/(16L) WEL, SPA} over the same draws
    and compares it with the (3/64) n delta floor.
    """
    engine = engine or ExpectationEngine()
    mechanism = _as_mechanism(mechanism, engine)
    if trials < 1:
        raise DomainError(f"trials = {trials} must be at least 1", "trials")

    revenues = np.empty(trials)
    benchmarks = np.empty(trials)
    family = hard_family("general", n)
    for t in range(trials):
        instance, _ = make_hard_instance("general", n, stream)
        outcome = mechanism.outcome(instance)
        revenues[t] = outcome.revenue
        spa_stats = outcome.stats if mechanism.base is BaseMechanism.SPA else engine.stats(instance, "spa")
        benchmarks[t] = min(3.0 / (16 * family.L) * spa_stats.wel, spa_stats.base_rev)

    ddof = 1 if trials > 1 else 0
    stderr = float(np.std(revenues, ddof=ddof) / math.sqrt(trials))
    bench_stderr = float(np.std(benchmarks, ddof=ddof) / math.sqrt(trials))
    multiplier = engine.config.STDERR_MULTIPLIER
    ceiling = 2.0 * n * family.delta
    floor = 3.0 / 64.0 * n * family.delta
    mean_rev = float(revenues.mean())
    benchmark_mean = float(benchmarks.mean())
    return UpperBoundReport(
        n=n,
        trials=trials,
        mean_rev=mean_rev,
        stderr=stderr,
        ceiling=ceiling,
        ok=mean_rev <= ceiling + multiplier * stderr,
        benchmark_mean=benchmark_mean,
        benchmark_floor=floor,
        benchmark_ok=benchmark_mean >= floor - multiplier * bench_stderr,
    )


@dataclass
class DegenerateReport:
    """Ex-ante IR ceiling on the tied pair plus the induced-table checks"""

    revenue: float
    wel: float
    base_rev: float
    ceiling_ok: bool
    ic_violations: int
    ir_violations: int
    feasibility_violations: int
    ok: bool

    def to_dict(self) -> dict:
        return asdict(self)


def degenerate_audit(mechanism: MechanismLike, n: int, factors: Sequence[float] = (0.0, 1.0, 2.0),
                     engine: ExpectationEngine = None) -> DegenerateReport:
    """
    Degenerate-instance checks

    On the tied pair (two buyers at 1, the rest at 0) no ex-ante IR
    mechanism can charge more than the welfare, which equals the
    second-price revenue. The induced bid table on scaled point masses
    must have no IC, IR or feasibility violation.
    """
    engine = engine or ExpectationEngine()
    mechanism = _as_mechanism(mechanism, engine)
    tied = make_tied_pair_instance(n)
    outcome = mechanism.outcome(tied)
    tolerance = engine.config.REGRET_TOLERANCE

    induced = induce_bid_mechanism(mechanism, Degenerate(1.0), factors, n=2)
    ic = len(induced.ic_violations(tolerance))
    ir = len(induced.ir_violations(tolerance))
    feasibility = len(induced.feasibility_violations(tolerance))
    ceiling_ok = outcome.revenue <= outcome.stats.wel + tolerance
    return DegenerateReport(
        revenue=outcome.revenue,
        wel=outcome.stats.wel,
        base_rev=outcome.stats.base_rev,
        ceiling_ok=ceiling_ok,
        ic_violations=ic,
        ir_violations=ir,
        feasibility_violations=feasibility,
        ok=ceiling_ok and ic == ir == feasibility == 0,
    )


# === SWEEPS ===

@dataclass
class SweepConfig:
    """Random either-or sweep settings"""

    count: int
    n_range: Tuple[int, int] = (2, 5)
    k_range: Tuple[int, int] = (1, 3)
    K: Tuple[int, ...] = (1,)
    seed: int = 0
    model: str = "spa"
    vmax: float = 10.0
    m_max: int = 3
    d_max: int = 2

    def __post_init__(self):
        if isinstance(self.K, int):
            self.K = (self.K,)
        self.K = tuple(int(k) for k in self.K)
        self.model = BaseMechanism.parse(self.model).value
        if self.count < 0:
            raise DomainError(f"count = {self.count} must be non-negative", "count")
        if not 2 <= self.n_range[0] <= self.n_range[1]:
            raise ParameterError(f"invalid n range {self.n_range}", "n_range")
        if not 1 <= self.k_range[0] <= self.k_range[1]:
            raise ParameterError(f"invalid atom-count range {self.k_range}", "k_range")
        if not self.K or min(self.K) < 1:
            raise ParameterError(f"K values {self.K} must be at least 1", "K")

    def to_dict(self) -> dict:
        return {key: (list(value) if isinstance(value, tuple) else value)
                for key, value in asdict(self).items()}


@dataclass
class SweepSummary:
    count: int
    violations: int
    min_margin: Optional[float]
    model: str
    seed: int

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SweepResult:
    reports: List[GuaranteeReport] = field(default_factory=list)
    summary: SweepSummary = None

    def to_dict(self) -> dict:
        return {"summary": self.summary.to_dict(), "reports": [r.to_dict() for r in self.reports]}


def _sweep_one(config: SweepConfig, index: int, engine: ExpectationEngine) -> GuaranteeReport:
    stream = np.random.default_rng([config.seed, index])
    n = int(stream.integers(config.n_range[0], config.n_range[1] + 1))
    k = int(stream.integers(config.k_range[0], config.k_range[1] + 1))
    K = config.K[int(stream.integers(0, len(config.K)))]

    if config.model == BaseMechanism.SPA.value:
        instance = random_discrete_instance(n, k, config.vmax, stream)
        stats = engine.stats(instance, "spa")
        revenue, _ = peer_max_revenue(instance, K, engine, stats)
    else:
        instance = random_multi_unit_instance(n, k, config.vmax, config.m_max, config.d_max, stream)
        stats = engine.stats(instance, "vcg")
        revenue, _ = peer_welfare_revenue(instance, K, engine, stats)

    return guarantee_report(index, n, K, stats.wel, stats.base_rev, revenue,
                            engine.config.REGRET_TOLERANCE)


def sweep(config: SweepConfig, engine: ExpectationEngine = None, workers: int = 1) -> SweepResult:
    """
    Check the either-or bound on random instances

    Instance ``index`` uses the sub-stream default_rng([seed, index]), so
    results do not depend on the worker count; reports come back in index order.

    Args:
        config: Sweep settings
        engine: Expectation engine
        workers: Thread count

    Returns:
        SweepResult: Per-instance reports and the summary
    """
    engine = engine or ExpectationEngine()
    indices = range(config.count)
    if workers > 1 and config.count > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(lambda index: _sweep_one(config, index, engine), indices))
    else:
        reports = [_sweep_one(config, index, engine) for index in indices]

    violations = sum(1 for report in reports if not report.satisfied)
    min_margin = min((report.margin for report in reports), default=None)
    summary = SweepSummary(config.count, violations, min_margin, config.model, config.seed)
    logger.info(f"📊 Sweep finished: {config.count} instances, {violations} violations")
    return SweepResult(reports, summary)
