"""Transition-ensemble analysis for molecular dynamics simulations.

Reduces, clusters, aligns, and visually encodes atomic state-to-state
transitions so displacement behavior can be cataloged at multiple
resolutions.
"""

__version__ = "0.1.0"
