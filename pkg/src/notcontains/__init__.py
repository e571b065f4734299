"""Solver for a single not-contains string constraint with regular
membership constraints on variables."""

__version__ = "0.1.0"
