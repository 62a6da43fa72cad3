"""Exact computation of torsion linking forms over ``K[t, t^-1]`` and their
signature-type invariants."""

__version__ = "0.1.0"
