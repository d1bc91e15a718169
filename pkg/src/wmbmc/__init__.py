"""Bounded model checking of shared-memory programs under SC, TSO and PSO."""

from .memmodel import MemoryModel
from .pipeline import CheckOptions, CheckResult, Verdict, check

__version__ = "0.1.0"

__all__ = ["CheckOptions", "CheckResult", "MemoryModel", "Verdict", "check"]
