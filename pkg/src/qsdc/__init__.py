"""Simulation and attack harness for quantum secure direct communication.

Covers the YZCSS protocol, the attacks that break it, and a modified
protocol with a secret permutation and mutual authentication.
"""

__version__ = "0.1.0"
