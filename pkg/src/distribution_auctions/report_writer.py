#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Report Writer Module
Serialises run reports to JSON or CSV with enough metadata to re-run them
"""

import csv
import hashlib
import io
import json
import logging
import sys
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .distributions import Instance, instance_to_json

logger = logging.getLogger(__name__)


def _json_default(value):
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"cannot serialise {type(value).__name__}")


def instance_digest(instance: Instance) -> str:
    """sha256 of the canonical JSON encoding"""
    canonical = json.dumps(instance_to_json(instance), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class ReportWriter:
    """
    JSON / CSV report output
    """

    def __init__(self, config, output_format: str = "json", output_path: Optional[str] = None):
        """
        Initialize report writer

        Args:
            config: Configuration object
            output_format: json or csv
            output_path: File to write; stdout when None
        """
        self.config = config
        self.output_format = output_format
        self.output_path = Path(output_path) if output_path else None

    def build_meta(self, subcommand: str, seed: int, options: dict,
                   instance: Optional[Instance] = None) -> dict:
        """
        Run metadata embedded in every report

        Args:
            subcommand: CLI subcommand (with target for reproduce)
            seed: Root seed
            options: Echo of the run options
            instance: Input instance, hashed when present
        """
        from . import __version__

        meta = {
            "version": __version__,
            "subcommand": subcommand,
            "seed": seed,
            "cap": self.config.EXACT_CAP,
            "options": options,
            "config": self.config.to_dict(),
        }
        if instance is not None:
            meta["instance_sha256"] = instance_digest(instance)
            meta["instance"] = instance_to_json(instance)
        return meta

    def render_json(self, report: dict) -> str:
        return json.dumps(report, sort_keys=True, indent=self.config.JSON_INDENT,
                          default=_json_default) + "\n"

    @staticmethod
    def render_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_json_default(cell) if isinstance(cell, (np.generic, np.ndarray)) else cell
                             for cell in row])
        return buffer.getvalue()

    def render(self, report: dict, table=None) -> str:
        """
        Render a report in the configured format

        Args:
            report: Full report (meta + result)
            table: Optional (header, rows) for CSV output; scalar result
                fields become key,value rows when absent
        """
        if self.output_format == "json":
            return self.render_json(report)
        if table is None:
            flat = [(key, value) for key, value in sorted(report["result"].items())
                    if not isinstance(value, (dict, list))]
            table = (("key", "value"), flat)
        header, rows = table
        return self.render_csv(header, rows)

    def write(self, text: str):
        """Write to the output file or stdout"""
        if self.output_path is None:
            sys.stdout.write(text)
            sys.stdout.flush()
            return
        try:
            self.output_path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.output_path, "w", newline="", encoding="utf-8") as f:
                f.write(text)
            logger.info(f"💾 Report written: {self.output_path}")
        except OSError as e:
            logger.error(f"❌ Report write error: {e}")
            raise

    def log_summary(self, subcommand: str, ok: bool, highlights: dict):
        """Log a short run summary"""
        status = "✅ passed" if ok else "❌ FAILED"
        logger.info(f"📋 {subcommand}: {status}")
        for key, value in highlights.items():
            logger.info(f"   {key}: {value}")
