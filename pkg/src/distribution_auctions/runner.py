#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Audit Runner Module
Dispatches a parsed run configuration to the engine, mechanisms and audits
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import psutil

from .audits import (
    GuaranteeReport,
    SweepConfig,
    concentration_audit,
    guarantee_report,
    ic_audit,
    posted_price_cap,
    sweep,
    upper_bound_audit,
)
from .bid_rules import BaseMechanism
from .config import Config
from .distributions import (
    Degenerate,
    Discrete,
    Distribution,
    Instance,
    distribution_to_json,
    distributions_equal,
)
from .engine import ExpectationEngine
from .errors import AuditFailure, UsageError
from .generators import hard_family
from .mechanisms import (
    IidTam,
    PeerMax,
    mechanism_from_config,
    peer_max_revenue,
    peer_welfare_revenue,
)
from .report_writer import ReportWriter

logger = logging.getLogger(__name__)

SUBCOMMANDS = ("stats", "run-pm", "run-pw", "run-iid", "ic-audit", "reproduce", "sweep")
REPRODUCE_TARGETS = ("iid", "lower", "upper", "concentration")

# Two-buyer reference instance: w = (1.5, 1), s = (1, 0.5), r = (2, 2)
FIXTURE_I1 = Instance((Discrete(((3.0, 0.5), (1.0, 0.5))), Degenerate(2.0)))
FIXTURE_I1_REVENUE = 0.5


@dataclass
class RunConfig:
    """
    One CLI invocation, fully parsed
    """

    subcommand: str
    target: Optional[str] = None
    instance: Optional[Instance] = None
    mechanism: Optional[dict] = None
    distribution_class: Optional[List[Distribution]] = None
    dist: Optional[Distribution] = None
    engine: str = "exact"
    model: Optional[str] = None
    samples: int = 100_000
    seed: int = 0
    cap: Optional[int] = None
    output: str = "json"
    output_path: Optional[str] = None
    k: int = 1
    n: Optional[int] = None
    trials: Optional[int] = None
    count: Optional[int] = None
    n_range: Tuple[int, int] = (2, 5)
    k_range: Tuple[int, int] = (1, 3)
    K: Optional[Tuple[int, ...]] = None
    vmax: float = 10.0
    m_max: int = 3
    d_max: int = 2
    workers: int = 1

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise UsageError(f"unknown subcommand {self.subcommand!r}")
        if self.subcommand == "reproduce" and self.target not in REPRODUCE_TARGETS:
            raise UsageError(f"reproduce target must be one of {', '.join(REPRODUCE_TARGETS)}")
        if self.engine not in ("exact", "mc"):
            raise UsageError(f"engine must be exact or mc, got {self.engine!r}")
        if self.engine == "mc" and self.samples < 1:
            raise UsageError("--samples must be at least 1 with the mc engine")
        if self.cap is not None and self.cap < 1:
            raise UsageError("--cap must be at least 1")
        if not 0 <= self.seed < 2 ** 64:
            raise UsageError("--seed must be a 64-bit unsigned integer")
        if self.output not in ("json", "csv"):
            raise UsageError(f"output must be json or csv, got {self.output!r}")
        if self.workers < 0:
            raise UsageError("--workers must be non-negative")

    @property
    def label(self) -> str:
        return f"reproduce {self.target}" if self.subcommand == "reproduce" else self.subcommand

    def options(self) -> dict:
        """Echo of the inputs that determine the result"""
        echo = {
            "engine": self.engine,
            "model": self.model,
            "samples": self.samples,
            "k": self.k,
            "n": self.n,
            "trials": self.trials,
            "count": self.count,
            "output": self.output,
        }
        if self.mechanism is not None:
            echo["mechanism"] = self.mechanism
        if self.dist is not None:
            echo["dist"] = distribution_to_json(self.dist)
        if self.distribution_class is not None:
            echo["class"] = [distribution_to_json(F) for F in self.distribution_class]
        if self.subcommand in ("sweep", "reproduce"):
            echo.update({"n_range": list(self.n_range), "k_range": list(self.k_range),
                         "K": list(self.K) if self.K else None,
                         "vmax": self.vmax, "m_max": self.m_max, "d_max": self.d_max})
        return echo


@dataclass
class CommandResult:
    result: dict
    ok: bool
    table: Optional[Tuple[Tuple[str, ...], list]] = None
    highlights: Dict[str, object] = field(default_factory=dict)


def resolve_workers(requested: int) -> int:
    """0 means one worker per physical core"""
    if requested > 0:
        return requested
    return psutil.cpu_count(logical=False) or psutil.cpu_count() or 1


class AuditRunner:
    """
    Runs one subcommand and writes its report
    """

    def __init__(self, config: Config = None):
        """
        Initialize runner

        Args:
            config: Configuration object; a fresh one per run keeps flags local
        """
        self.config = config or Config()
        self.engine = ExpectationEngine(self.config)
        self.handlers: Dict[str, Callable[[RunConfig], CommandResult]] = {
            "stats": self.cmd_stats,
            "run-pm": self.cmd_run_pm,
            "run-pw": self.cmd_run_pw,
            "run-iid": self.cmd_run_iid,
            "ic-audit": self.cmd_ic_audit,
            "sweep": self.cmd_sweep,
            "reproduce iid": self.cmd_reproduce_iid,
            "reproduce lower": self.cmd_reproduce_lower,
            "reproduce upper": self.cmd_reproduce_upper,
            "reproduce concentration": self.cmd_reproduce_concentration,
        }

    def run(self, run: RunConfig) -> int:
        """
        Execute and write the report

        Returns:
            int: 0 when every audit passed

        Raises:
            AuditFailure: After the report is written, when an audit failed
        """
        if run.cap is not None:
            self.config.update_engine_settings(cap=run.cap)
        if not self.config.validate_settings():
            raise UsageError("invalid configuration")

        logger.info(f"🚀 Running {run.label} (seed {run.seed}, cap {self.config.EXACT_CAP})")
        outcome = self.handlers[run.label](run)

        writer = ReportWriter(self.config, run.output, run.output_path)
        report = {
            "meta": writer.build_meta(run.label, run.seed, run.options(), run.instance),
            "result": outcome.result,
            "status": "ok" if outcome.ok else "audit_failed",
        }
        writer.write(writer.render(report, outcome.table))
        writer.log_summary(run.label, outcome.ok, outcome.highlights)
        if not outcome.ok:
            raise AuditFailure(f"{run.label} found a violated guarantee (report status audit_failed)")
        return 0

    # === HELPERS ===

    def _require_instance(self, run: RunConfig) -> Instance:
        if run.instance is None:
            raise UsageError(f"{run.label} needs --instance")
        return run.instance

    def _model_for(self, run: RunConfig, instance: Instance) -> BaseMechanism:
        if run.model is not None:
            return BaseMechanism.parse(run.model)
        return BaseMechanism.SPA if instance.is_single_item else BaseMechanism.VCG

    def _peer_result(self, run: RunConfig, model: BaseMechanism) -> CommandResult:
        instance = self._require_instance(run)
        stats = self.engine.stats(instance, model)
        compute = peer_max_revenue if model is BaseMechanism.SPA else peer_welfare_revenue
        revenue, per_alpha = compute(instance, run.k, self.engine, stats)
        report = guarantee_report(0, instance.n, run.k, stats.wel, stats.base_rev, revenue,
                                  self.config.REGRET_TOLERANCE)
        result = report.to_dict()
        result["per_alpha"] = [{"alpha": alpha, "rev": rev} for alpha, rev in per_alpha]
        result["stats"] = stats.to_dict()
        table = (("alpha", "rev"), [[alpha, rev] for alpha, rev in per_alpha])
        return CommandResult(result, report.satisfied, table,
                             {"revenue": revenue, "bound": report.bound, "margin": report.margin})

    def _iid_result(self, instance: Instance) -> CommandResult:
        stats = self.engine.stats(instance, BaseMechanism.SPA)
        mechanism = IidTam(self.engine)
        outcome = mechanism.outcome(instance)
        identical = all(distributions_equal(F, instance.buyers[0]) for F in instance.buyers)
        gap = abs(outcome.revenue - stats.wel)
        full_extraction = gap <= self.config.ACCOUNTING_TOLERANCE
        result = {
            "revenue": outcome.revenue,
            "wel": stats.wel,
            "base_rev": stats.base_rev,
            "thresholds": list(outcome.branches[0].thresholds),
            "participation": outcome.participation.tolist(),
            "identical": identical,
            "full_extraction": full_extraction,
        }
        ok = full_extraction or not identical
        return CommandResult(result, ok, highlights={"revenue": outcome.revenue, "wel": stats.wel})

    # === SUBCOMMANDS ===

    def cmd_stats(self, run: RunConfig) -> CommandResult:
        instance = self._require_instance(run)
        model = self._model_for(run, instance)
        if run.engine == "mc":
            stats = self.engine.stats_mc(instance, model, run.samples, np.random.default_rng(run.seed))
        else:
            stats = self.engine.stats(instance, model)
        result = stats.to_dict()
        if stats.stderr is None:
            result["accounting_gap"] = float(np.max(stats.accounting_gaps()))
            result["chain_violation"] = stats.chain_violation()
        rows = [[i, stats.w[i], stats.s[i], stats.r[i]] for i in range(stats.n)]
        return CommandResult(result, True, (("buyer", "w", "s", "r"), rows),
                             {"wel": stats.wel, "base_rev": stats.base_rev})

    def cmd_run_pm(self, run: RunConfig) -> CommandResult:
        return self._peer_result(run, BaseMechanism.SPA)

    def cmd_run_pw(self, run: RunConfig) -> CommandResult:
        return self._peer_result(run, BaseMechanism.VCG)

    def cmd_run_iid(self, run: RunConfig) -> CommandResult:
        return self._iid_result(self._require_instance(run))

    def cmd_ic_audit(self, run: RunConfig) -> CommandResult:
        if run.mechanism is None or not run.distribution_class:
            raise UsageError("ic-audit needs --mech and --class")
        mechanism = mechanism_from_config(run.mechanism, self.engine)
        n = run.n or 2
        report = ic_audit(mechanism, run.distribution_class, n, engine=self.engine)
        return CommandResult(report.to_dict(), report.ok,
                             highlights={"max_regret": report.max_regret, "witness": report.witness})

    def _sweep_config(self, run: RunConfig, count: int, K) -> SweepConfig:
        return SweepConfig(count=count, n_range=run.n_range, k_range=run.k_range, K=K, seed=run.seed,
                           model=run.model or "spa", vmax=run.vmax, m_max=run.m_max, d_max=run.d_max)

    def cmd_sweep(self, run: RunConfig) -> CommandResult:
        config = self._sweep_config(run, run.count if run.count is not None else 1000, run.K or (1,))
        result = sweep(config, self.engine, resolve_workers(run.workers))
        ok = result.summary.violations == 0
        rows = [report.csv_row() for report in result.reports]
        return CommandResult(result.to_dict(), ok, (GuaranteeReport.CSV_HEADER, rows),
                             {"violations": result.summary.violations,
                              "min_margin": result.summary.min_margin})

    def cmd_reproduce_iid(self, run: RunConfig) -> CommandResult:
        if run.dist is None:
            raise UsageError("reproduce iid needs --dist")
        n = run.n or 2
        if n < 2:
            raise UsageError("--n must be at least 2")
        instance = Instance(tuple(run.dist for _ in range(n)))
        run.instance = instance
        return self._iid_result(instance)

    def cmd_reproduce_lower(self, run: RunConfig) -> CommandResult:
        fixture_stats = self.engine.stats(FIXTURE_I1, BaseMechanism.SPA)
        revenue, _ = peer_max_revenue(FIXTURE_I1, 1, self.engine, fixture_stats)
        fixture = guarantee_report(0, 2, 1, fixture_stats.wel, fixture_stats.base_rev, revenue)
        fixture_ok = abs(revenue - FIXTURE_I1_REVENUE) <= self.config.ACCOUNTING_TOLERANCE

        config = self._sweep_config(run, run.count if run.count is not None else 1000, run.K or (1, 2, 3))
        swept = sweep(config, self.engine, resolve_workers(run.workers))
        ok = fixture_ok and fixture.satisfied and swept.summary.violations == 0
        result = {"fixture": fixture.to_dict(), "fixture_ok": fixture_ok, "sweep": swept.to_dict()}
        rows = [report.csv_row() for report in swept.reports]
        return CommandResult(result, ok, (GuaranteeReport.CSV_HEADER, rows),
                             {"fixture_revenue": revenue, "violations": swept.summary.violations})

    def cmd_reproduce_upper(self, run: RunConfig) -> CommandResult:
        caps = {}
        for n in (16, 64, 256, 1024):
            caps[str(n)] = posted_price_cap(hard_family("general", n)).to_dict()
        n = run.n or 64
        trials = run.trials or 300
        upper = upper_bound_audit(PeerMax(run.k, self.engine), n, trials,
                                  np.random.default_rng([run.seed, 0]), self.engine)
        ok = all(cap["ok"] for cap in caps.values()) and upper.ok
        result = {"posted_price_caps": caps, "upper_bound": upper.to_dict()}
        return CommandResult(result, ok, highlights={"mean_rev": upper.mean_rev, "ceiling": upper.ceiling})

    def cmd_reproduce_concentration(self, run: RunConfig) -> CommandResult:
        trials = run.trials or 2000
        sizes = (run.n,) if run.n else (64, 256)
        reports = []
        for index, n in enumerate(sizes):
            for offset, kind in enumerate(("general", "regular")):
                stream = np.random.default_rng([run.seed, 2 * index + offset])
                reports.append(concentration_audit(n, trials, stream, kind, self.config.CONFIDENCE_LEVEL))
        ok = all(report.ok for report in reports)
        rows = [[r.kind, r.n, r.trials, r.successes, r.frequency, r.lower_bound, r.ok] for r in reports]
        header = ("kind", "n", "trials", "successes", "frequency", "lower_bound", "ok")
        return CommandResult({"concentration": [r.to_dict() for r in reports]}, ok, (header, rows),
                             {f"{r.kind} n={r.n}": f"{r.frequency:.3f}" for r in reports})
