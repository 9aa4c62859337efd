"""Poisson brackets coupling matter and electromagnetic fields.

Brackets are bivector applications ``xdot = L(x) dH``; the bracket value is
``{F, H} = <dF, L(x) dH>`` under the quadrature pairing.
"""
__version__ = "0.1.0"
