"""Fermion pair creation in anisotropic Bianchi type-I backgrounds.

Mode-by-mode evolution of the occupation ``S`` and pair correlation
``(U, V)`` of a massive Dirac field, and momentum-space assembly of the
normally ordered energy-momentum tensor.
"""

__version__ = "1.0.0"
