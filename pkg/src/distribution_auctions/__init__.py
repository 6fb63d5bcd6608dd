"""Distribution-reporting auction mechanisms: benchmarks, mechanisms and audits."""

__version__ = "1.0.0"

from .audits import (
    either_or_bound,
    ic_audit,
    arrangement_audit,
    posted_price_cap,
    concentration_audit,
    upper_bound_audit,
    degenerate_audit,
    sweep,
    SweepConfig,
    GuaranteeReport,
)
from .bid_rules import BaseMechanism, BidOutcome, spa_outcome, vcg_outcome
from .config import Config, config
from .distributions import (
    Degenerate,
    Discrete,
    Instance,
    TruncatedEqualRevenue,
    quantile_at,
    scale,
    mean,
    cdf,
    sample,
    sample_many,
    max_distribution,
    discretize,
)
from .engine import ExpectationEngine, PerBuyerStats, CouplingCell
from .errors import (
    AuctionError,
    AuditFailure,
    CapacityError,
    DomainError,
    ParameterError,
    UnsupportedRepresentationError,
    UsageError,
    ValidationError,
)
from .generators import (
    make_truncated_er_iid,
    make_hard_instance,
    random_discrete_instance,
    make_degenerate_instance,
)
from .mechanisms import (
    alpha_support,
    rev_at_alpha,
    tam_evaluate,
    peer_max_revenue,
    peer_welfare_revenue,
    iid_tam_revenue,
    induce_bid_mechanism,
    mechanism_from_config,
)
from .cli import main

__all__ = [
    "__version__",
    "AuctionError", "AuditFailure", "CapacityError", "DomainError", "ParameterError",
    "UnsupportedRepresentationError", "UsageError", "ValidationError",
    "BaseMechanism", "BidOutcome", "Config", "config", "CouplingCell",
    "Degenerate", "Discrete", "ExpectationEngine", "GuaranteeReport", "Instance",
    "PerBuyerStats", "SweepConfig", "TruncatedEqualRevenue",
    "alpha_support", "arrangement_audit", "cdf", "concentration_audit", "degenerate_audit",
    "discretize", "either_or_bound", "ic_audit", "iid_tam_revenue", "induce_bid_mechanism",
    "main", "make_degenerate_instance", "make_hard_instance", "make_truncated_er_iid",
    "max_distribution", "mean", "mechanism_from_config", "peer_max_revenue",
    "peer_welfare_revenue", "posted_price_cap", "quantile_at", "random_discrete_instance",
    "rev_at_alpha", "sample", "sample_many", "scale", "spa_outcome", "sweep",
    "tam_evaluate", "upper_bound_audit", "vcg_outcome",
]
