#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Mechanisms Module
Threshold-augmented mechanisms over a bid-reporting base, and what is built on them

A distribution-reporting mechanism here is a lottery over threshold
vectors (TAM branches). Each branch charges buyer i the base-mechanism
expected payment plus an entry fee tau_i that depends only on the other
buyers' reports, and excludes i when its base utility under the reported
profile falls short of tau_i. Plain TAM has one branch, Peer-Max and
Peer-Welfare draw the fee multiplier alpha from a geometric grid.
"""

import itertools
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .bid_rules import BaseMechanism, BidOutcome, spa_outcome, vcg_outcome
from .config import config
from .distributions import Distribution, Instance, as_discrete, mean, scale
from .engine import ExpectationEngine, PerBuyerStats
from .errors import ParameterError, ValidationError

logger = logging.getLogger(__name__)

__all__ = [
    "AlphaGrid",
    "BidOutcome",
    "DistributionMechanism",
    "IidTam",
    "InducedBidMechanism",
    "MechanismOutcome",
    "PeerMax",
    "PeerWelfare",
    "TamBranch",
    "TamMechanism",
    "TamReport",
    "alpha_support",
    "iid_tam_revenue",
    "induce_bid_mechanism",
    "mechanism_from_config",
    "peer_max_revenue",
    "peer_max_sampled_revenue",
    "peer_welfare_revenue",
    "rev_at_alpha",
    "spa_outcome",
    "tam_evaluate",
    "tam_from_stats",
    "vcg_outcome",
]


# === FEE MULTIPLIER GRID ===

@dataclass(frozen=True)
class AlphaGrid:
    """
    Support of the fee multiplier: ``high_atom`` w.p. 1/2, else uniform on ``grid``

    grid = {0, 2^-L, ..., 1/2, 1, 2, ..., 2^K} with L = ceil(log2(4n)).
    """

    K: int
    L: int
    grid: Tuple[float, ...]
    high_atom: float

    @property
    def size(self) -> int:
        return len(self.grid)

    def distribution(self) -> List[Tuple[float, float]]:
        """(alpha, probability) pairs; probabilities sum to 1"""
        uniform = 1.0 / (2 * self.size)
        return [(self.high_atom, 0.5)] + [(alpha, uniform) for alpha in self.grid]

    def draw(self, size: int, stream: np.random.Generator) -> np.ndarray:
        high = stream.random(size) < 0.5
        uniform = np.asarray(self.grid)[stream.integers(0, self.size, size=size)]
        return np.where(high, self.high_atom, uniform)


def alpha_support(K: int, n: int) -> AlphaGrid:
    """
    Build the fee-multiplier grid

    Args:
        K: Largest grid exponent, at least 1
        n: Number of buyers, at least 2

    Returns:
        AlphaGrid: K + L + 2 grid points plus the high atom 2^(K+1)
    """
    if K < 1:
        raise ParameterError(f"K = {K} must be at least 1", "k")
    if n < 2:
        raise ParameterError(f"need at least 2 buyers, got {n}", "n")
    L = (4 * n - 1).bit_length()
    grid = (0.0,) + tuple(2.0 ** e for e in range(-L, K + 1))
    return AlphaGrid(K=K, L=L, grid=grid, high_atom=2.0 ** (K + 1))


def rev_at_alpha(stats: PerBuyerStats, alpha: float, tolerance: Optional[float] = None) -> float:
    """Revenue of the fee vector alpha * r: sum of s_i + alpha r_i over buyers with w_i >= s_i + alpha r_i"""
    tolerance = config.TIE_TOLERANCE if tolerance is None else tolerance
    charge = stats.s + alpha * stats.r
    keep = stats.w >= charge - tolerance
    return float(math.fsum(charge[keep]))


# === THRESHOLD-AUGMENTED MECHANISM ===

@dataclass
class TamReport:
    """One threshold vector applied to one reported profile"""

    u_base: np.ndarray
    thresholds: np.ndarray
    participates: np.ndarray
    p: np.ndarray
    revenue: float
    utilities: Optional[np.ndarray] = None

    def to_dict(self) -> dict:
        result = {
            "u_base": self.u_base.tolist(),
            "thresholds": [_encode_threshold(t) for t in self.thresholds],
            "participates": self.participates.tolist(),
            "p": self.p.tolist(),
            "revenue": self.revenue,
        }
        if self.utilities is not None:
            result["utilities"] = self.utilities.tolist()
        return result


def _encode_threshold(value: float):
    return None if math.isinf(value) else float(value)


def tam_from_stats(stats: PerBuyerStats, thresholds: Sequence[float],
                   tolerance: Optional[float] = None) -> TamReport:
    """Participation and ex-ante payments of one threshold vector, given the reported-profile stats"""
    tolerance = config.TIE_TOLERANCE if tolerance is None else tolerance
    thresholds = np.asarray(thresholds, dtype=float)
    if thresholds.shape != stats.w.shape:
        raise ParameterError(f"expected {stats.n} thresholds, got {thresholds.size}", "thresholds")
    u_base = stats.u_base
    participates = u_base >= thresholds - tolerance
    p = np.where(participates, stats.s + np.where(participates, thresholds, 0.0), 0.0)
    return TamReport(
        u_base=u_base,
        thresholds=thresholds,
        participates=participates,
        p=p,
        revenue=float(math.fsum(p)),
    )


def tam_evaluate(base, thresholds: Sequence[float], reported: Instance,
                 true_profile: Optional[Sequence[Distribution]] = None,
                 engine: ExpectationEngine = None) -> TamReport:
    """
    Evaluate a threshold-augmented mechanism on a reported profile

    Args:
        base: Base mechanism (spa or vcg)
        thresholds: Entry fee per buyer (inf excludes)
        reported: Reported profile, used as the mechanism's belief
        true_profile: Optional true laws; adds each buyer's true ex-ante utility
        engine: Expectation engine

    Returns:
        TamReport: Base utilities, participation, payments, revenue
    """
    engine = engine or ExpectationEngine()
    base = BaseMechanism.parse(base)
    stats = engine.stats(reported, base)
    report = tam_from_stats(stats, thresholds, engine.config.TIE_TOLERANCE)

    if true_profile is not None:
        utilities = np.zeros(reported.n)
        for i, true_F in enumerate(true_profile):
            if report.participates[i]:
                gross = engine.exante_utility_exact(base, i, reported, true_F)
                utilities[i] = gross - report.thresholds[i]
        report.utilities = utilities
    return report


@dataclass(frozen=True)
class TamBranch:
    """Threshold vector played with probability ``weight``"""

    weight: float
    thresholds: Tuple[float, ...]


@dataclass
class MechanismOutcome:
    """
    Expected participation and payments over a mechanism's branches

    participation[i] is the probability buyer i is admitted; fee[i] is
    its expected entry fee; p[i] its expected total payment.
    """

    stats: PerBuyerStats
    branches: List[TamBranch]
    participation: np.ndarray
    fee: np.ndarray
    p: np.ndarray

    @property
    def revenue(self) -> float:
        return float(math.fsum(self.p))


class DistributionMechanism(ABC):
    """
    Distribution-reporting mechanism built from TAM branches over a base mechanism
    """

    name = "mechanism"

    def __init__(self, base, engine: ExpectationEngine = None):
        self.base = BaseMechanism.parse(base)
        self.engine = engine or ExpectationEngine()

    @abstractmethod
    def branches(self, reported: Instance, stats: PerBuyerStats) -> List[TamBranch]:
        """Lottery over threshold vectors for the reported profile"""

    @abstractmethod
    def to_config(self) -> dict:
        """JSON mechanism config"""

    def outcome(self, reported: Instance) -> MechanismOutcome:
        """
        Evaluate every branch on a reported profile

        Args:
            reported: Reported distribution profile

        Returns:
            MechanismOutcome: Expected participation, fees and payments
        """
        stats = self.engine.stats(reported, self.base)
        branches = self.branches(reported, stats)
        participation = np.zeros(reported.n)
        fee = np.zeros(reported.n)
        p = np.zeros(reported.n)
        tolerance = self.engine.config.TIE_TOLERANCE
        for branch in branches:
            report = tam_from_stats(stats, branch.thresholds, tolerance)
            admitted = report.participates
            participation += branch.weight * admitted
            fee += branch.weight * np.where(admitted, report.thresholds, 0.0)
            p += branch.weight * report.p
        return MechanismOutcome(stats=stats, branches=branches, participation=participation, fee=fee, p=p)

    def revenue(self, instance: Instance) -> float:
        """Expected revenue under truthful reports"""
        return self.outcome(instance).revenue

    def utility(self, i: int, reported: Instance, true_F: Distribution,
                outcome: MechanismOutcome = None) -> float:
        """
        Ex-ante utility of buyer i with true law ``true_F`` under ``reported``

        Args:
            i: Buyer index
            reported: Reported profile (entry i is buyer i's report)
            true_F: Buyer i's true law
            outcome: Precomputed outcome for ``reported``
        """
        outcome = outcome or self.outcome(reported)
        if outcome.participation[i] <= 0:
            return 0.0
        gross = self.engine.exante_utility_exact(self.base, i, reported, true_F)
        return float(outcome.participation[i] * gross - outcome.fee[i])

    def allocation_weights(self, i: int, reported: Instance, bids: Sequence[float],
                           outcome: MechanismOutcome = None) -> Tuple[np.ndarray, np.ndarray]:
        """
        Expected allocation and payment of buyer i per candidate bid

        Allocation is scaled by the admission probability; payment is the
        admission-weighted base payment plus the expected fee, spread over bids.
        """
        outcome = outcome or self.outcome(reported)
        response = self.engine.bid_response(self.base, i, bids, reported)
        admitted = outcome.participation[i]
        return admitted * response.alloc, admitted * response.pay + outcome.fee[i]

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.to_config()})"


class TamMechanism(DistributionMechanism):
    """Fixed thresholds (independent of every report)"""

    name = "tam"

    def __init__(self, thresholds: Sequence[float], base="spa", engine: ExpectationEngine = None):
        super().__init__(base, engine)
        self.thresholds = tuple(float(t) for t in thresholds)

    def branches(self, reported: Instance, stats: PerBuyerStats) -> List[TamBranch]:
        if len(self.thresholds) != reported.n:
            raise ParameterError(f"{len(self.thresholds)} thresholds for {reported.n} buyers", "thresholds")
        return [TamBranch(1.0, self.thresholds)]

    def to_config(self) -> dict:
        return {"mech": self.name, "base": self.base.value,
                "thresholds": [_encode_threshold(t) for t in self.thresholds]}


class PeerMax(DistributionMechanism):
    """Fee alpha * E[optimal welfare of the others], alpha drawn from the fee grid"""

    name = "peer_max"

    def __init__(self, K: int, engine: ExpectationEngine = None, base="spa"):
        super().__init__(base, engine)
        self.K = int(K)
        if self.K < 1:
            raise ParameterError(f"K = {K} must be at least 1", "k")

    def branches(self, reported: Instance, stats: PerBuyerStats) -> List[TamBranch]:
        grid = alpha_support(self.K, reported.n)
        return [TamBranch(prob, tuple((alpha * stats.r).tolist())) for alpha, prob in grid.distribution()]

    def to_config(self) -> dict:
        return {"mech": self.name, "k": self.K}


class PeerWelfare(PeerMax):
    """Peer-Max over multi-unit VCG"""

    name = "peer_welfare"

    def __init__(self, K: int, engine: ExpectationEngine = None):
        super().__init__(K, engine, base="vcg")


class IidTam(DistributionMechanism):
    """
    Fee of buyer i = its second-price utility had it reported like buyer i'

    i' is the smallest index other than i. Extracts full welfare when
    every buyer has the same law.
    """

    name = "iid_tam"

    def __init__(self, engine: ExpectationEngine = None):
        super().__init__("spa", engine)

    def thresholds(self, reported: Instance) -> Tuple[float, ...]:
        fees = []
        for i in range(reported.n):
            peer = 1 if i == 0 else 0
            buyers = list(reported.buyers)
            buyers[i] = buyers[peer]
            fees.append(self.engine.buyer_base_utility(reported.with_buyers(buyers), i, self.base))
        return tuple(fees)

    def branches(self, reported: Instance, stats: PerBuyerStats) -> List[TamBranch]:
        return [TamBranch(1.0, self.thresholds(reported))]

    def to_config(self) -> dict:
        return {"mech": self.name}


def _parse_threshold(raw, path: str) -> float:
    if raw is None or (isinstance(raw, str) and raw.lower() in ("inf", "+inf", "infinity")):
        return math.inf
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ValidationError(f"threshold must be a number, null or 'inf', got {raw!r}", path)
    return float(raw)


def mechanism_from_config(config: dict, engine: ExpectationEngine = None) -> DistributionMechanism:
    """
    Build a mechanism from its JSON config

    Args:
        config: e.g. {"mech": "peer_max", "k": 1} or
            {"mech": "tam", "base": "spa", "thresholds": [0.5, 0.5]}
        engine: Expectation engine shared by the mechanism

    Returns:
        DistributionMechanism: Configured mechanism
    """
    if not isinstance(config, dict):
        raise ValidationError("mechanism config must be a JSON object", "mech")
    kind = config.get("mech")
    if kind == "tam":
        raw = config.get("thresholds")
        if not isinstance(raw, list):
            raise ValidationError("tam needs a thresholds list", "thresholds")
        thresholds = [_parse_threshold(t, f"thresholds[{k}]") for k, t in enumerate(raw)]
        return TamMechanism(thresholds, config.get("base", "spa"), engine)
    if kind in ("peer_max", "peer_welfare"):
        K = config.get("k")
        if isinstance(K, bool) or not isinstance(K, int):
            raise ValidationError(f"{kind} needs an integer k, got {K!r}", "k")
        return PeerMax(K, engine) if kind == "peer_max" else PeerWelfare(K, engine)
    if kind == "iid_tam":
        return IidTam(engine)
    raise ValidationError(f"unknown mechanism {kind!r}", "mech")


# === REVENUE OF THE NAMED MECHANISMS ===

def _peer_revenue(instance: Instance, K: int, model: BaseMechanism, engine: ExpectationEngine,
                  stats: PerBuyerStats = None) -> Tuple[float, List[Tuple[float, float]]]:
    engine = engine or ExpectationEngine()
    stats = stats if stats is not None else engine.stats(instance, model)
    grid = alpha_support(K, instance.n)
    tolerance = engine.config.TIE_TOLERANCE
    per_alpha = [(alpha, rev_at_alpha(stats, alpha, tolerance)) for alpha in grid.grid]
    high = rev_at_alpha(stats, grid.high_atom, tolerance)
    revenue = 0.5 * high + math.fsum(rev for _, rev in per_alpha) / (2 * grid.size)
    return revenue, per_alpha


def peer_max_revenue(instance: Instance, K: int, engine: ExpectationEngine = None,
                     stats: PerBuyerStats = None) -> Tuple[float, List[Tuple[float, float]]]:
    """
    Peer-Max expected revenue in closed form over the fee grid

    Returns:
        tuple: (revenue, [(alpha, REV(alpha)) for alpha in the uniform grid])
    """
    if not instance.is_single_item:
        raise ParameterError("Peer-Max runs on single-item instances; use Peer-Welfare", "instance")
    return _peer_revenue(instance, K, BaseMechanism.SPA, engine, stats)


def peer_welfare_revenue(instance: Instance, K: int, engine: ExpectationEngine = None,
                         stats: PerBuyerStats = None) -> Tuple[float, List[Tuple[float, float]]]:
    """Peer-Welfare expected revenue: the Peer-Max formula with VCG statistics"""
    return _peer_revenue(instance, K, BaseMechanism.VCG, engine, stats)


def peer_max_sampled_revenue(instance: Instance, K: int, draws: int, stream: np.random.Generator,
                             engine: ExpectationEngine = None) -> Tuple[float, float]:
    """
    Peer-Max revenue averaged over sampled fee multipliers

    Returns:
        tuple: (mean revenue, standard error)
    """
    engine = engine or ExpectationEngine()
    stats = engine.stats(instance, BaseMechanism.SPA)
    alphas = alpha_support(K, instance.n).draw(draws, stream)
    revenues = np.array([rev_at_alpha(stats, alpha, engine.config.TIE_TOLERANCE) for alpha in alphas])
    stderr = float(np.std(revenues, ddof=1) / math.sqrt(draws)) if draws > 1 else 0.0
    return float(revenues.mean()), stderr


def iid_tam_revenue(instance: Instance, engine: ExpectationEngine = None) -> float:
    """Revenue of the peer-report fee mechanism (equals welfare on identical laws)"""
    if not instance.is_single_item:
        raise ParameterError("iid_tam runs on single-item instances", "instance")
    return IidTam(engine).revenue(instance)


# === INDUCED BID-REPORTING MECHANISM ===

@dataclass
class InducedBidMechanism:
    """
    Bid-reporting mechanism induced on scaled copies of one base law

    ``x[row, i]`` is E[v(q_i) x_i] and ``p[row, i]`` the ex-ante payment
    when the buyers report scale factors ``profiles[row]``.
    """

    factors: Tuple[float, ...]
    profiles: List[Tuple[float, ...]]
    x: np.ndarray
    p: np.ndarray
    value_mass: np.ndarray

    def __post_init__(self):
        self._rows: Dict[Tuple[float, ...], int] = {profile: row for row, profile in enumerate(self.profiles)}

    def row(self, profile: Sequence[float]) -> int:
        return self._rows[tuple(profile)]

    def utility(self, i: int, true_factor: float, profile: Sequence[float]) -> float:
        row = self.row(profile)
        return float(true_factor * self.x[row, i] - self.p[row, i])

    def ic_table(self) -> List[dict]:
        """
        One row per (true profile, buyer, deviation)

        Returns:
            list: dicts with truthful and deviation utilities and their gap
        """
        rows = []
        for profile in self.profiles:
            for i, true_factor in enumerate(profile):
                truthful = self.utility(i, true_factor, profile)
                for deviation in self.factors:
                    if deviation == true_factor:
                        continue
                    deviated = list(profile)
                    deviated[i] = deviation
                    gain = self.utility(i, true_factor, deviated) - truthful
                    rows.append({"profile": list(profile), "buyer": i, "deviation": deviation,
                                 "truthful": truthful, "gain": gain})
        return rows

    def ic_violations(self, tolerance: float = 1e-9) -> List[dict]:
        return [row for row in self.ic_table() if row["gain"] > tolerance]

    def feasibility_violations(self, tolerance: float = 1e-9) -> List[dict]:
        """Rows where x_i exceeds the buyer's capacity times the base-law mean"""
        over = self.x - self.value_mass[None, :]
        return [{"profile": list(self.profiles[row]), "buyer": int(i), "excess": float(over[row, i])}
                for row, i in zip(*np.nonzero(over > tolerance))]

    def ir_violations(self, tolerance: float = 1e-9) -> List[dict]:
        violations = []
        for profile in self.profiles:
            for i, factor in enumerate(profile):
                utility = self.utility(i, factor, profile)
                if utility < -tolerance:
                    violations.append({"profile": list(profile), "buyer": i, "utility": utility})
        return violations

    def to_dict(self) -> dict:
        return {
            "factors": list(self.factors),
            "profiles": [list(profile) for profile in self.profiles],
            "x": self.x.tolist(),
            "p": self.p.tolist(),
        }


def induce_bid_mechanism(mechanism: DistributionMechanism, base: Distribution, factors: Sequence[float],
                         n: int = 2, m: float = 1.0, demands: Sequence[float] = None) -> InducedBidMechanism:
    """
    Tabulate the bid-reporting mechanism a distribution mechanism induces on scaled laws

    Buyer i with factor a_i has value a_i * v(q_i) for the base law's
    quantile function v; reporting factor a' means bidding a' * v(q_i).

    Args:
        mechanism: Distribution-reporting mechanism
        base: Base law (discrete)
        factors: Finite factor grid
        n: Number of buyers
        m: Supply
        demands: Demand capacities

    Returns:
        InducedBidMechanism: x and p tables over every factor profile
    """
    law = as_discrete(base)
    factors = tuple(float(a) for a in factors)
    if not factors or any(a < 0 for a in factors):
        raise ParameterError("factor grid must be non-empty and non-negative", "factors")
    demands = tuple(demands) if demands else (1.0,) * n

    profiles = list(itertools.product(factors, repeat=n))
    x = np.zeros((len(profiles), n))
    p = np.zeros((len(profiles), n))
    for row, profile in enumerate(profiles):
        reported = Instance(tuple(scale(law, a) for a in profile), m, demands)
        outcome = mechanism.outcome(reported)
        p[row] = outcome.p
        for i, a in enumerate(profile):
            if outcome.participation[i] <= 0:
                continue
            response = mechanism.engine.bid_response(mechanism.base, i, a * law.values, reported)
            x[row, i] = outcome.participation[i] * float(law.probs @ (law.values * response.alloc))

    value_mass = np.asarray(demands, dtype=float) * mean(law)
    logger.debug(f"🧮 Induced table: {len(profiles)} profiles over factors {factors}")
    return InducedBidMechanism(factors, profiles, x, p, value_mass)
