"""Constant-depth circuits for synthetic MDPs, checked against an exact DP oracle."""

__version__ = "0.1.0"
