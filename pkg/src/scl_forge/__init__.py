"""Certified bounds for (mixed) stable commutator length in free groups."""

__version__ = "0.1.0"

from .word import Word, commutator, cyclic_reduce, inverse, multiply, parse_word, power, primitive_root, reduce
from .marking import Marking, in_N, in_mixed_commutator, chain_in_CZ
from .chains import Chain1, Chain2, boundary, h_normal_form, scale_approximate
from .qm import BrooksCombination, bavard_lower_bound, homogenized_value
from .search import SearchBudget, cl_upper_search, chain_cl_upper
from .lp import truncated_filling_norm, scl_upper_from_filling
from .bounds import BoundInterval, Budgets, compare_modes, scl_interval, stabilization_sequence

__all__ = [
    "Word", "commutator", "cyclic_reduce", "inverse", "multiply", "parse_word", "power", "primitive_root",
    "reduce", "Marking", "in_N", "in_mixed_commutator", "chain_in_CZ", "Chain1", "Chain2", "boundary",
    "h_normal_form", "scale_approximate", "BrooksCombination", "bavard_lower_bound", "homogenized_value",
    "SearchBudget", "cl_upper_search", "chain_cl_upper", "truncated_filling_norm", "scl_upper_from_filling",
    "BoundInterval", "Budgets", "compare_modes", "scl_interval", "stabilization_sequence",
]
