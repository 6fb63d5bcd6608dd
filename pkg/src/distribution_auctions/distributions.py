#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Distributions Module
Buyer value laws, quantile-function calculus and the JSON codec

Quantiles follow v(q) = F^-1(1 - q): high values sit at low quantiles and
v is left-continuous, so q ~ U[0, 1] reproduces F exactly.
"""

import math
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from .config import config
from .errors import DomainError, UnsupportedRepresentationError, ValidationError


@dataclass(frozen=True)
class Discrete:
    """
    Finite atom list

    Atoms are ``(value, prob)`` pairs, deduplicated and sorted by
    descending value at construction.
    """

    atoms: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        merged = {}
        for index, atom in enumerate(self.atoms):
            try:
                value, prob = float(atom[0]), float(atom[1])
            except (TypeError, ValueError, IndexError):
                raise ValidationError("atom must be a (value, prob) pair", f"support[{index}]")
            if not math.isfinite(value) or value < 0:
                raise ValidationError(f"value {value} must be finite and non-negative", f"support[{index}]")
            if not 0 < prob <= 1 + config.PROB_TOLERANCE:
                raise ValidationError(f"probability {prob} must be in (0, 1]", f"support[{index}]")
            merged[value] = merged.get(value, 0.0) + prob

        if not merged:
            raise ValidationError("support must contain at least one atom", "support")

        total = math.fsum(merged.values())
        if abs(total - 1.0) > config.PROB_TOLERANCE:
            raise ValidationError(f"probabilities sum to {total!r}, expected 1", "support")

        ordered = tuple((value, merged[value] / total) for value in sorted(merged, reverse=True))
        object.__setattr__(self, "atoms", ordered)

    @property
    def values(self) -> np.ndarray:
        """Support values, descending"""
        return np.array([value for value, _ in self.atoms], dtype=float)

    @property
    def probs(self) -> np.ndarray:
        return np.array([prob for _, prob in self.atoms], dtype=float)

    @property
    def tail_breakpoints(self) -> np.ndarray:
        """Cumulative upper-tail masses c_k = P[v >= x_k]; the last one is exactly 1"""
        tail = np.cumsum(self.probs)
        tail[-1] = 1.0
        return tail

    def quantile(self, q) -> np.ndarray:
        tail = self.tail_breakpoints
        index = np.searchsorted(tail, np.asarray(q, dtype=float) - config.PROB_TOLERANCE, side="left")
        return self.values[np.clip(index, 0, len(tail) - 1)]

    def cdf(self, v) -> np.ndarray:
        values = self.values[::-1]
        cumulative = np.cumsum(self.probs[::-1])
        cumulative[-1] = 1.0
        index = np.searchsorted(values, np.asarray(v, dtype=float), side="right") - 1
        return np.where(index >= 0, cumulative[np.clip(index, 0, None)], 0.0)

    def mean(self) -> float:
        return math.fsum(value * prob for value, prob in self.atoms)

    def scaled(self, a: float) -> "Discrete":
        return Discrete(tuple((value * a, prob) for value, prob in self.atoms))


@dataclass(frozen=True)
class Degenerate:
    """Point mass at ``value``"""

    value: float

    def __post_init__(self):
        value = float(self.value)
        if not math.isfinite(value) or value < 0:
            raise ValidationError(f"value {value} must be finite and non-negative", "value")
        object.__setattr__(self, "value", value)

    def to_discrete(self) -> Discrete:
        return Discrete(((self.value, 1.0),))

    def quantile(self, q) -> np.ndarray:
        return np.full(np.shape(q), self.value, dtype=float)

    def cdf(self, v) -> np.ndarray:
        return np.where(np.asarray(v, dtype=float) >= self.value, 1.0, 0.0)

    def mean(self) -> float:
        return self.value

    def scaled(self, a: float) -> "Degenerate":
        return Degenerate(self.value * a)


@dataclass(frozen=True)
class TruncatedEqualRevenue:
    """
    Truncated equal-revenue law with quantile ``scale / max(q, 1/h)``

    CDF is 1 - scale/v on [scale, scale*h) with an atom of mass 1/h at
    scale*h. Every posted price in [scale, scale*h] earns ``scale``.
    """

    scale: float
    h: float

    def __post_init__(self):
        scale, h = float(self.scale), float(self.h)
        if not math.isfinite(scale) or scale <= 0:
            raise ValidationError(f"scale {scale} must be positive", "scale")
        if not math.isfinite(h) or h < 1:
            raise ValidationError(f"h {h} must be at least 1", "h")
        object.__setattr__(self, "scale", scale)
        object.__setattr__(self, "h", h)

    @property
    def top(self) -> float:
        return self.scale * self.h

    def quantile(self, q) -> np.ndarray:
        return self.scale / np.maximum(np.asarray(q, dtype=float), 1.0 / self.h)

    def cdf(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        with np.errstate(divide="ignore"):
            body = 1.0 - self.scale / np.where(v > 0, v, 1.0)
        return np.where(v < self.scale, 0.0, np.where(v >= self.top, 1.0, body))

    def mean(self) -> float:
        return self.scale * (1.0 + math.log(self.h))

    def scaled(self, a: float) -> "TruncatedEqualRevenue":
        return TruncatedEqualRevenue(self.scale * a, self.h)


Distribution = Union[Discrete, Degenerate, TruncatedEqualRevenue]


@dataclass(frozen=True)
class Instance:
    """
    n buyers with supply ``m`` and demand capacities ``demands``

    Single-item instances have m = 1 and every demand equal to 1.
    """

    buyers: Tuple[Distribution, ...]
    m: float = 1.0
    demands: Tuple[float, ...] = ()

    def __post_init__(self):
        buyers = tuple(self.buyers)
        if len(buyers) < 2:
            raise ValidationError(f"need at least 2 buyers, got {len(buyers)}", "buyers")
        demands = tuple(float(d) for d in self.demands) if self.demands else (1.0,) * len(buyers)
        if len(demands) != len(buyers):
            raise ValidationError(f"expected {len(buyers)} demands, got {len(demands)}", "demands")
        for index, d in enumerate(demands):
            if not math.isfinite(d) or d <= 0:
                raise ValidationError(f"demand {d} must be positive", f"demands[{index}]")
        m = float(self.m)
        if not math.isfinite(m) or m <= 0:
            raise ValidationError(f"supply {m} must be positive", "m")
        object.__setattr__(self, "buyers", buyers)
        object.__setattr__(self, "demands", demands)
        object.__setattr__(self, "m", m)

    @property
    def n(self) -> int:
        return len(self.buyers)

    @property
    def is_single_item(self) -> bool:
        return self.m == 1.0 and all(d == 1.0 for d in self.demands)

    @property
    def is_discrete(self) -> bool:
        return all(not isinstance(F, TruncatedEqualRevenue) for F in self.buyers)

    def with_buyers(self, buyers: Sequence[Distribution]) -> "Instance":
        """Same supply and demands, different value laws"""
        return Instance(tuple(buyers), self.m, self.demands)


# === QUANTILE CALCULUS ===

def as_discrete(F: Distribution) -> Discrete:
    """Discrete view of F; parametric laws are rejected"""
    if isinstance(F, Discrete):
        return F
    if isinstance(F, Degenerate):
        return F.to_discrete()
    raise UnsupportedRepresentationError(
        f"{type(F).__name__} has no finite support; use Monte Carlo or discretize() first"
    )


def quantile_at(F: Distribution, q: float) -> float:
    """
    Evaluate the quantile function v(q) = F^-1(1 - q)

    Args:
        F: Value distribution
        q: Quantile in [0, 1]

    Returns:
        float: Value at quantile q (v(0) is the top of the support)
    """
    q = float(q)
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"quantile {q} outside [0, 1]", "q")
    return float(F.quantile(q))


def scale(F: Distribution, a: float) -> Distribution:
    """Multiply every value by ``a``; a = 0 collapses to Degenerate(0)"""
    a = float(a)
    if a < 0:
        raise DomainError(f"scale factor {a} must be non-negative", "a")
    if a == 0:
        return Degenerate(0.0)
    if a == 1:
        return F
    return F.scaled(a)


def mean(F: Distribution) -> float:
    return F.mean()


def cdf(F: Distribution, v: float) -> float:
    """P[value <= v]"""
    return float(F.cdf(v))


def sample(F: Distribution, stream: np.random.Generator) -> float:
    return float(F.quantile(stream.random()))


def sample_many(F: Distribution, size: int, stream: np.random.Generator) -> np.ndarray:
    """Vectorised inverse-quantile sampling"""
    return F.quantile(stream.random(size))


def max_distribution(Fs: Sequence[Distribution]) -> Discrete:
    """
    Exact law of the maximum of independent draws

    Args:
        Fs: Discrete or Degenerate distributions

    Returns:
        Discrete: Distribution of max_j v_j
    """
    laws = [as_discrete(F) for F in Fs]
    support = np.unique(np.concatenate([law.values for law in laws]))
    joint_cdf = np.ones_like(support)
    for law in laws:
        joint_cdf = joint_cdf * law.cdf(support)
    joint_cdf[-1] = 1.0
    masses = np.diff(np.concatenate(([0.0], joint_cdf)))
    keep = masses > config.MIN_ATOM_MASS
    return Discrete(tuple(zip(support[keep].tolist(), masses[keep].tolist())))


def discretize(F: Distribution, cells: int) -> Discrete:
    """
    Equal-quantile discretisation

    Each cell ((k-1)/cells, k/cells] carries mass 1/cells at the value of
    its upper quantile endpoint, so the result is dominated by F.
    """
    if cells < 1:
        raise DomainError(f"cells {cells} must be at least 1", "cells")
    if not isinstance(F, TruncatedEqualRevenue):
        return as_discrete(F)
    upper = np.arange(1, cells + 1) / cells
    return Discrete(tuple((float(v), 1.0 / cells) for v in F.quantile(upper)))


# === JSON CODEC ===

def distribution_to_json(F: Distribution) -> dict:
    if isinstance(F, Discrete):
        return {"kind": "discrete",
                "support": [{"value": value, "prob": prob} for value, prob in F.atoms]}
    if isinstance(F, Degenerate):
        return {"kind": "degenerate", "value": F.value}
    return {"kind": "truncated_er", "scale": F.scale, "h": F.h}


def _require(obj: dict, key: str, path: str):
    if not isinstance(obj, dict) or key not in obj:
        raise ValidationError(f"missing field '{key}'", path)
    return obj[key]


def _number(raw, path: str) -> float:
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ValidationError(f"expected a number, got {raw!r}", path)
    return float(raw)


def distribution_from_json(obj: dict, path: str = "distribution") -> Distribution:
    """
    Decode one distribution

    Args:
        obj: Parsed JSON object
        path: Field path used in error messages (e.g. ``buyers[0]``)
    """
    kind = _require(obj, "kind", path)
    try:
        if kind == "discrete":
            support = _require(obj, "support", path)
            if not isinstance(support, list):
                raise ValidationError("support must be a list", f"{path}.support")
            atoms = tuple(
                (_number(_require(atom, "value", f"{path}.support[{k}]"), f"{path}.support[{k}].value"),
                 _number(_require(atom, "prob", f"{path}.support[{k}]"), f"{path}.support[{k}].prob"))
                for k, atom in enumerate(support)
            )
            return Discrete(atoms)
        if kind == "degenerate":
            return Degenerate(_number(_require(obj, "value", path), f"{path}.value"))
        if kind == "truncated_er":
            return TruncatedEqualRevenue(_number(_require(obj, "scale", path), f"{path}.scale"),
                                         _number(_require(obj, "h", path), f"{path}.h"))
    except ValidationError as e:
        if e.field is not None and e.field.startswith(path):
            raise
        raise ValidationError(str(e), path) from e
    raise ValidationError(f"unknown distribution kind {kind!r}", f"{path}.kind")


def instance_to_json(instance: Instance) -> dict:
    return {
        "m": instance.m,
        "demands": list(instance.demands),
        "buyers": [distribution_to_json(F) for F in instance.buyers],
    }


def instance_from_json(obj: dict) -> Instance:
    """Decode an instance; errors name the offending field path"""
    if not isinstance(obj, dict):
        raise ValidationError("instance must be a JSON object", "$")
    raw_buyers = _require(obj, "buyers", "$")
    if not isinstance(raw_buyers, list):
        raise ValidationError("buyers must be a list", "buyers")
    buyers = [distribution_from_json(raw, f"buyers[{i}]") for i, raw in enumerate(raw_buyers)]
    m = _number(obj.get("m", 1), "m")
    raw_demands = obj.get("demands") or [1] * len(buyers)
    if not isinstance(raw_demands, list):
        raise ValidationError("demands must be a list", "demands")
    demands = [_number(d, f"demands[{i}]") for i, d in enumerate(raw_demands)]
    return Instance(tuple(buyers), m, tuple(demands))


def distributions_equal(F: Distribution, G: Distribution) -> bool:
    """Semantic equality (Degenerate == one-atom Discrete)"""
    if isinstance(F, TruncatedEqualRevenue) or isinstance(G, TruncatedEqualRevenue):
        return F == G
    return as_discrete(F).atoms == as_discrete(G).atoms

