"""Proof obligation generation and discharge for contract-annotated models."""

__version__ = "0.1.0"
