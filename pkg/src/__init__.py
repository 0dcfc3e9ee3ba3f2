"""
tilde-ck
Combinatorics of boundary actions on trees and Ã₂ buildings, and the
K-theory of the associated rank-1 and rank-2 Cuntz–Krieger algebras.
"""

__version__ = "1.0.1"
