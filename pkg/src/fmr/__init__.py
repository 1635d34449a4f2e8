"""Formal matrix rings over small finite base rings.

Construction of multiplier-twisted and general formal matrix rings,
exhaustive automorphism-group enumeration, and machine verification of
their structural decompositions.
"""

__version__ = "0.1.0"
