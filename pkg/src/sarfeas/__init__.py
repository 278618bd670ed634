"""Feasibility analysis for spaceborne SAR ship detection.

Computes the minimum detectable ship RCS for a given SAR system, geometry and
detection requirement, plus Monte Carlo oracles for the detection statistics.
"""

__version__ = "0.1.0"
