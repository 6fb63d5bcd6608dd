#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Generators Module
Instance families: truncated equal-revenue, hard families, random sweeps, degenerate
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .distributions import (
    Degenerate,
    Discrete,
    Distribution,
    Instance,
    TruncatedEqualRevenue,
    distribution_to_json,
)
from .errors import DomainError, ParameterError

HARD_KINDS = ("general", "regular")


def make_truncated_er_iid(n: int, h: float, scale: float = 1.0) -> Instance:
    """n identical truncated equal-revenue buyers (single item)"""
    if n < 2:
        raise ParameterError(f"need at least 2 buyers, got {n}", "n")
    return Instance(tuple(TruncatedEqualRevenue(scale, h) for _ in range(n)))


def truncated_er_closed_forms(n: int, h: float, scale: float = 1.0) -> dict:
    """
    Closed forms for make_truncated_er_iid(n, h, scale)

    Returns:
        dict: mean per buyer, second-price revenue (equal to the optimal
        revenue for this family) and the welfare lower bound
    """
    per_buyer = scale * (1.0 + math.log(h))
    spa = scale * h * (1.0 - (1.0 - 1.0 / h) ** n)
    return {"mean": per_buyer, "spa": spa, "myerson": spa, "wel_lower": per_buyer}


@dataclass(frozen=True)
class HardFamily:
    """
    Randomised hard family: member F^j drawn with probability delta * 2^j

    Exponents run over 1..L. ``epsilon`` is the probability of a non-zero
    value (general kind) or the truncation quantile (regular kind).
    """

    kind: str
    n: int
    L: int
    epsilon: float
    delta: float
    members: Tuple[Distribution, ...]
    weights: Tuple[float, ...]

    @property
    def exponents(self) -> Tuple[int, ...]:
        return tuple(range(1, self.L + 1))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "L": self.L,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "weights": list(self.weights),
            "members": [distribution_to_json(F) for F in self.members],
        }


def hard_family(kind: str, n: int) -> HardFamily:
    """
    Build the hard-family metadata for ``n`` buyers

    Args:
        kind: general (two-atom laws) or regular (truncated equal-revenue)
        n: Number of buyers, at least 16

    Returns:
        HardFamily: L = floor(log2(n)/2) - 1, epsilon = 1/(4n), delta = 1/(2^(L+1) - 2)
    """
    if kind not in HARD_KINDS:
        raise ParameterError(f"unknown hard-family kind {kind!r}", "kind")
    if n < 16:
        raise ParameterError(
            f"n = {n} gives L = floor(log2(n)/2) - 1 < 1; hard families need L >= 1 (n >= 16)", "n"
        )
    L = (int(n).bit_length() - 1) // 2 - 1
    epsilon = 1.0 / (4 * n)
    delta = 1.0 / (2 ** (L + 1) - 2)

    members = []
    for j in range(1, L + 1):
        if kind == "general":
            members.append(Discrete(((1.0 / (2 ** j * epsilon), epsilon), (0.0, 1.0 - epsilon))))
        else:
            members.append(TruncatedEqualRevenue(1.0 / 2 ** j, 1.0 / epsilon))
    weights = tuple(delta * 2 ** j for j in range(1, L + 1))
    return HardFamily(kind, n, L, epsilon, delta, tuple(members), weights)


def draw_family_indices(family: HardFamily, size, stream: np.random.Generator) -> np.ndarray:
    """Draw member exponents j in 1..L with probabilities delta * 2^j"""
    probs = np.asarray(family.weights, dtype=float)
    return stream.choice(np.arange(1, family.L + 1), size=size, p=probs / probs.sum())


def make_hard_instance(kind: str, n: int, stream: np.random.Generator) -> Tuple[Instance, HardFamily]:
    """
    Draw one instance from a hard family

    Returns:
        tuple: (instance, family metadata)
    """
    family = hard_family(kind, n)
    exponents = draw_family_indices(family, n, stream)
    buyers = tuple(family.members[j - 1] for j in exponents)
    return Instance(buyers), family


def _random_law(k: int, vmax: float, stream: np.random.Generator) -> Distribution:
    values = stream.uniform(0.0, vmax, size=k)
    if k == 1:
        return Degenerate(float(values[0]))
    probs = stream.dirichlet(np.ones(k))
    return Discrete(tuple(zip(values.tolist(), probs.tolist())))


def random_discrete_instance(n: int, k: int, vmax: float, stream: np.random.Generator) -> Instance:
    """
    Random single-item instance

    Args:
        n: Number of buyers
        k: Atoms per buyer
        vmax: Values are uniform on [0, vmax]
        stream: Seeded generator
    """
    if n < 2:
        raise ParameterError(f"need at least 2 buyers, got {n}", "n")
    if k < 1:
        raise ParameterError(f"need at least 1 atom per buyer, got {k}", "k")
    if vmax <= 0:
        raise DomainError(f"vmax {vmax} must be positive", "vmax")
    return Instance(tuple(_random_law(k, vmax, stream) for _ in range(n)))


def random_iid_instance(n: int, k: int, vmax: float, stream: np.random.Generator) -> Instance:
    """n copies of one random k-atom law"""
    if n < 2:
        raise ParameterError(f"need at least 2 buyers, got {n}", "n")
    law = _random_law(k, vmax, stream)
    return Instance(tuple(law for _ in range(n)))


def random_multi_unit_instance(n: int, k: int, vmax: float, m_max: int, d_max: int,
                               stream: np.random.Generator) -> Instance:
    """Random multi-unit instance with integer supply in [1, m_max] and demands in [1, d_max]"""
    base = random_discrete_instance(n, k, vmax, stream)
    m = int(stream.integers(1, m_max + 1))
    demands = tuple(int(d) for d in stream.integers(1, d_max + 1, size=n))
    return Instance(base.buyers, m, demands)


def make_degenerate_instance(values: Sequence[float], m: float = 1.0,
                             demands: Optional[Sequence[float]] = None) -> Instance:
    """Every buyer's value is known: one Degenerate law per entry of ``values``"""
    return Instance(tuple(Degenerate(v) for v in values), m, tuple(demands or ()))


def make_tied_pair_instance(n: int) -> Instance:
    """Two buyers at value 1, the rest at 0: welfare and second-price revenue both equal 1"""
    if n < 2:
        raise ParameterError(f"need at least 2 buyers, got {n}", "n")
    return make_degenerate_instance([1.0, 1.0] + [0.0] * (n - 2))
