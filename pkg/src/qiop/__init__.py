"""Exactly-verifiable simulation of quantum interactive oracle proofs at desk scale."""

__version__ = "0.1.0"
