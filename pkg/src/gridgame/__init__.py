"""Game-theoretic resilience analysis for microgrids under cyber-physical attack.

Builds an AHP-weighted payoff matrix from power-flow simulation on a radial
feeder, then computes and compares defensive strategies with equilibrium
solvers, learning agents, and a Monte Carlo statistics harness.
"""

__version__ = "0.1.0"

from . import backend

__all__ = ["backend", "__version__"]
