"""Randomized black-box algorithms for finite distributive expanded groups.

Explicit finite algebras (Cayley tables) are hidden behind salted
bit-string oracles; the algorithms compute additive generating systems,
ideal generators and variety membership through oracle queries alone,
and the truth module recomputes everything by brute force for
verification.
"""

from .algebras import CayleyAlgebra, build_family
from .blackbox import Handle, Oracle, ScalarLaneBatch, VectorOracle, make_oracle
from .ideals import DerivedBatchOracle, DerivedOracle, ideal_additive_generators
from .randgen import GenParams, additive_generating_system, choose_k
from .terms import GAMMA, Identity, OpSymbol, Signature, Term
from .varieties import IdentityBasis, decide_variety_membership, standard_basis

__all__ = [
    "CayleyAlgebra",
    "DerivedBatchOracle",
    "DerivedOracle",
    "GAMMA",
    "GenParams",
    "Handle",
    "Identity",
    "IdentityBasis",
    "OpSymbol",
    "Oracle",
    "ScalarLaneBatch",
    "Signature",
    "Term",
    "VectorOracle",
    "additive_generating_system",
    "build_family",
    "choose_k",
    "decide_variety_membership",
    "ideal_additive_generators",
    "make_oracle",
    "standard_basis",
]

__version__ = "0.1.0"
