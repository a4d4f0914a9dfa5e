"""Prefix orders, partial history preserving maps and their projective limits."""

from .errors import PrefixLimError
from .family import ChainFamily, FamilyKind, FiniteFamily, builtin_family, validate_family
from .limits import check_universal_property, enumerate_threads, exact_chain_limit
from .lts import Lts, bisimilar, unfold
from .maps import PhpMap, compose, enumerate_php_maps, validate_php_direct, validate_php_theorem1
from .order import PrefixOrder, is_isomorphic, validate_order

__all__ = [
    "PrefixLimError", "PrefixOrder", "validate_order", "is_isomorphic",
    "PhpMap", "compose", "enumerate_php_maps", "validate_php_direct", "validate_php_theorem1",
    "ChainFamily", "FiniteFamily", "FamilyKind", "builtin_family", "validate_family",
    "enumerate_threads", "exact_chain_limit", "check_universal_property",
    "Lts", "unfold", "bisimilar",
]
