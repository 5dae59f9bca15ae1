"""Proximity contact-tracing protocol simulator.

A deterministic simulator for beacon-based contact tracing: eleven protocol
designs spanning the (what-patients-report x who-matches) grid, adversary
models with surveillance and false-exposure attacks, leakage oracles, and a
cost ledger, all scored against expected property matrices.
"""

__version__ = "0.1.0"
