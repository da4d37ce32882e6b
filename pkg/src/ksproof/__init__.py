"""Exact verification of the eighteen-ray Kochen-Specker set and its two-qubit reading."""

__version__ = "0.1.0"
