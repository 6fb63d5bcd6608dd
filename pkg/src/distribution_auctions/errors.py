#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Error Module
Exception hierarchy shared by the library and the CLI exit codes
"""

from typing import Optional


class AuctionError(Exception):
    """Base error; ``exit_code`` is what the CLI returns for it"""

    exit_code = 1


class UsageError(AuctionError):
    """Unknown subcommand or malformed flags"""

    exit_code = 1


class ValidationError(AuctionError):
    """Input data violates a distribution or instance invariant"""

    exit_code = 2

    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class DomainError(ValidationError):
    """Argument outside its mathematical domain"""


class ParameterError(ValidationError):
    """Parameter combination outside the supported regime"""


class CapacityError(AuctionError):
    """Exact computation larger than its configured cap"""

    exit_code = 3

    def __init__(self, size: int, cap: int, what: str = "joint support profiles"):
        self.size = size
        self.cap = cap
        super().__init__(
            f"{size} {what}, above the cap of {cap}; "
            "use the Monte Carlo engine or raise the cap"
        )


class UnsupportedRepresentationError(AuctionError):
    """Operation needs discrete distributions but got a parametric one"""

    exit_code = 3


class AuditFailure(AuctionError):
    """An audit found a violated guarantee"""

    exit_code = 4
