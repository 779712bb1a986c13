"""Explicit-state modal mu-calculus checking for scan-cycle controller models."""

from .checker import VerificationResult, check
from .lts import ExploreLimits, Lts, explore, export_lts, import_lts
from .mucalc import parse_formula
from .speclang import load_model

__version__ = "0.1.0"

__all__ = ["ExploreLimits", "Lts", "VerificationResult", "check", "explore",
           "export_lts", "import_lts", "load_model", "parse_formula"]
