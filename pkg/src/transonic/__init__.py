"""Transonic spiral flows in an annulus and a concentric cylinder.

Subpackages are imported lazily; ``import transonic`` stays cheap so the
command line can set thread limits before numpy is loaded.
"""
__version__ = "0.1.0"
