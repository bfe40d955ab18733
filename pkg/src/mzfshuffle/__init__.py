"""Shuffle products of multiple zeta functions via infinite partial
fraction decomposition, with numeric verification tools."""
from .engine import Expansion, expand_shuffle, finite_identity, integer_specialize
from .mzf import LatticePlan, mzf_eval, mzf_eval_batch
from .realize import TruncationPlan, realize
from .rootzeta import RootZetaMatrix, root_zeta_eval
from .verifier import IDENTITIES, IdentitySpec, VerificationReport, check_identity, stuffle_expand

__all__ = [
    "Expansion",
    "IDENTITIES",
    "IdentitySpec",
    "LatticePlan",
    "RootZetaMatrix",
    "TruncationPlan",
    "VerificationReport",
    "check_identity",
    "expand_shuffle",
    "finite_identity",
    "integer_specialize",
    "mzf_eval",
    "mzf_eval_batch",
    "realize",
    "root_zeta_eval",
    "stuffle_expand",
]
