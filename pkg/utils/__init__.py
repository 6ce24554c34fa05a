"""
LinAmalg utilities
Terms, saturation, finite algebras, amalgamation, Fraisse chains, file handling and fixtures
"""

__version__ = "1.0.0"

from .terms import (
    EquationalTheory,
    Linearity,
    LinearTheory,
    Signature,
    classify_equation,
    parse_equation,
    parse_signature,
    parse_term,
)
from .theory_engine import SaturatedTheory, saturate
from .algebra import FiniteAlgebra, find_embedding, is_model, is_subalgebra
from .amalgam import (
    AmalgamationInput,
    CustomEta,
    FixedElement,
    FreshElement,
    MaxUnderCarrierOrder,
    amalgamate,
    amalgamate_hk,
    build_n_element,
    joint_embed,
    joint_embed_hk,
    search_amalgam_on_union,
    search_joint_embedding,
)
from .fraisse import FraisseChain, check_universality, generate_small_algebras, run_chain
from .file_handler import FileHandler
from .fixtures import FixtureSet
from .report import ReportRecord

__all__ = [
    # terms
    'EquationalTheory',
    'Linearity',
    'LinearTheory',
    'Signature',
    'classify_equation',
    'parse_equation',
    'parse_signature',
    'parse_term',

    # saturation
    'SaturatedTheory',
    'saturate',

    # algebras
    'FiniteAlgebra',
    'find_embedding',
    'is_model',
    'is_subalgebra',

    # amalgamation
    'AmalgamationInput',
    'CustomEta',
    'FixedElement',
    'FreshElement',
    'MaxUnderCarrierOrder',
    'amalgamate',
    'amalgamate_hk',
    'build_n_element',
    'joint_embed',
    'joint_embed_hk',
    'search_amalgam_on_union',
    'search_joint_embedding',

    # chains
    'FraisseChain',
    'check_universality',
    'generate_small_algebras',
    'run_chain',

    # files and reports
    'FileHandler',
    'FixtureSet',
    'ReportRecord'
]
