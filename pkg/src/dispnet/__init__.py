"""Proof-net theorem prover and parser for the Displacement calculus."""

__version__ = "0.1.0"
