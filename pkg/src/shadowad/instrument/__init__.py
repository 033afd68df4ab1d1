"""The forward-mode AD pass over superblocks."""

from .bitlogic import AND, OR, XOR, ad_bitlogic, classify_lane
from .differentiate import differentiate_expression, differentiate_op
from .layout import AdPolicy, Layout
from .rewrite import PASS_THROUGH, instrument_program, instrument_superblock, rewrite_cas

__all__ = [
    "AND",
    "OR",
    "XOR",
    "AdPolicy",
    "Layout",
    "PASS_THROUGH",
    "ad_bitlogic",
    "classify_lane",
    "differentiate_expression",
    "differentiate_op",
    "instrument_program",
    "instrument_superblock",
    "rewrite_cas",
]
