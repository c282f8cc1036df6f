"""Exact-arithmetic toolkit for lattice isometry groups, finite orthogonal
groups, and the automorphism groups of cyclic-orbifold module spaces.
"""

__version__ = "0.1.0"
