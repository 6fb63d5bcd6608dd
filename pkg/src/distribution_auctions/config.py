#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Configuration Module
Engine tolerances, audit constants and run defaults
"""

import logging
import os

logger = logging.getLogger(__name__)


class Config:
    """
    Library configuration
    Every tunable lives here as an uppercase attribute
    """

    def __init__(self):
        """Initialize configuration with defaults"""

        # === EXACT ENGINE ===
        self.EXACT_CAP = 1_000_000          # Max joint-support profiles enumerated
        self.ORDER_STATS_CAP = 10**10       # Max n * S^2 steps of the order-statistics path
        self.TIE_TOLERANCE = 1e-12          # Participation boundaries
        self.PROB_TOLERANCE = 1e-12         # Probability sums and cell measures
        self.MIN_ATOM_MASS = 1e-15          # Atoms lighter than this are dropped

        # === AUDIT TOLERANCES ===
        self.REGRET_TOLERANCE = 1e-9        # IC regret, IR, table checks
        self.ACCOUNTING_TOLERANCE = 1e-9    # r_i = s_i + sum w_j and the chain
        self.STDERR_MULTIPLIER = 4.0        # Monte Carlo agreement band
        self.CONFIDENCE_LEVEL = 0.99        # One-sided binomial confidence

        # === MONTE CARLO ===
        self.DEFAULT_SAMPLES = 100_000
        self.DEFAULT_SEED = 0

        # === OUTPUT ===
        self.LOG_LEVEL = "WARNING"
        self.JSON_INDENT = 2

        self._load_from_environment()

    def _load_from_environment(self):
        """Load the joint-support cap override (CI sizing)"""
        raw = os.getenv("AUCTION_EXACT_CAP")
        if raw is None:
            return
        try:
            self.EXACT_CAP = int(raw)
        except ValueError:
            logger.warning(f"⚠️ Ignoring AUCTION_EXACT_CAP={raw!r}: not an integer")

    def get_engine_config(self) -> dict:
        """
        Return engine settings

        Returns:
            dict: Engine settings
        """
        return {
            'cap': self.EXACT_CAP,
            'order_statistics_cap': self.ORDER_STATS_CAP,
            'tie_tolerance': self.TIE_TOLERANCE,
            'prob_tolerance': self.PROB_TOLERANCE,
        }

    def get_audit_config(self) -> dict:
        """
        Return audit settings

        Returns:
            dict: Audit settings
        """
        return {
            'regret_tolerance': self.REGRET_TOLERANCE,
            'accounting_tolerance': self.ACCOUNTING_TOLERANCE,
            'stderr_multiplier': self.STDERR_MULTIPLIER,
            'confidence_level': self.CONFIDENCE_LEVEL,
        }

    def update_engine_settings(self, cap: int = None, tie_tolerance: float = None):
        """
        Update engine settings

        Args:
            cap: New joint-support cap
            tie_tolerance: New tie tolerance
        """
        if cap is not None:
            self.EXACT_CAP = int(cap)
        if tie_tolerance is not None:
            self.TIE_TOLERANCE = float(tie_tolerance)

        logger.info(f"⚙️ Engine settings updated: cap={self.EXACT_CAP}, tie={self.TIE_TOLERANCE}")

    def validate_settings(self) -> bool:
        """
        Validate settings

        Returns:
            bool: True if every setting is valid
        """
        errors = []

        if self.EXACT_CAP < 1:
            errors.append("EXACT_CAP must be at least 1")
        if self.ORDER_STATS_CAP < 1:
            errors.append("ORDER_STATS_CAP must be at least 1")
        if not 0 <= self.TIE_TOLERANCE < 1e-6:
            errors.append("TIE_TOLERANCE must be in [0, 1e-6)")
        if self.REGRET_TOLERANCE < 0:
            errors.append("REGRET_TOLERANCE must be non-negative")
        if self.STDERR_MULTIPLIER <= 0:
            errors.append("STDERR_MULTIPLIER must be positive")
        if not 0.5 < self.CONFIDENCE_LEVEL < 1:
            errors.append("CONFIDENCE_LEVEL must be in (0.5, 1)")
        if self.DEFAULT_SAMPLES < 1:
            errors.append("DEFAULT_SAMPLES must be at least 1")

        if errors:
            for error in errors:
                logger.error(f"❌ Config error: {error}")
            return False

        return True

    def print_current_settings(self):
        """Log current settings"""
        logger.info("⚙️ Current settings:")
        logger.info(f"   Joint-support cap: {self.EXACT_CAP}")
        logger.info(f"   Order-statistics cap: {self.ORDER_STATS_CAP}")
        logger.info(f"   Tie tolerance: {self.TIE_TOLERANCE}")
        logger.info(f"   Regret tolerance: {self.REGRET_TOLERANCE}")
        logger.info(f"   Monte Carlo samples: {self.DEFAULT_SAMPLES} (seed {self.DEFAULT_SEED})")

    def to_dict(self) -> dict:
        """Settings echoed into reports"""
        return {
            'engine': self.get_engine_config(),
            'audit': self.get_audit_config(),
        }


# Global config instance
config = Config()
