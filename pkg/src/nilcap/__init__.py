"""nilcap: Hall commutators, nilpotent products of cyclic p-groups, capability.

Collects words in free nilpotent groups over a Hall basis, builds consistent
power-commutator presentations of k-nilpotent products of cyclic p-groups
for k <= p+1, and computes their centers and capability.

Usage:
    import nilcap

    # Module-level convenience
    g = nilcap.group(2, 3, (1, 1))          # dihedral group of order 16
    z = nilcap.normal_form(nilcap.parse_expr("[x2,x1]^2", 2), g)

    # Or work with the pieces directly
    from nilcap import GroupSpec, build_group, center_report

    g = build_group(GroupSpec(p=3, k=3, alphas=(1, 2)))
    print(center_report(g, brute=True).match)
"""

from nilcap.analysis import (
    CenterFormula,
    CenterReport,
    NotCentralReport,
    Rule,
    Verdict,
    WitnessReport,
    capability_decide,
    capability_necessary,
    capability_verdict,
    capability_witness,
    center_bruteforce,
    center_formula,
    center_report,
    check_notcentral_identity,
    is_central,
    subgroup_closure,
)
from nilcap.cache import RelationCache
from nilcap.collect import (
    FreeNilElement,
    FreeNilpotentGroup,
    RewriteResult,
    commutate_with,
    embed,
    free_group,
    power_commutator_expansion,
    rewrite_basic_pair,
    truncate,
)
from nilcap.config import Settings, load_settings
from nilcap.exceptions import (
    BasisMismatchError,
    CacheFormatError,
    ConsistencyError,
    ExprSyntaxError,
    GeneratorIndexError,
    NilcapError,
    NotBasicError,
    OutOfRangeError,
    PreconditionError,
    ResourceLimitError,
    ShoveUndefinedError,
)
from nilcap.hall import (
    BasicCommutator,
    BasisTable,
    compare,
    from_expr,
    generate_basis,
    is_basic,
    shove,
    shove_recursive,
    witt_count,
)
from nilcap.nilprod import (
    DistinguishedBasis,
    GroupSpec,
    PcElement,
    PcPresentation,
    binom_reduction,
    build_group,
    cached_build_group,
    lcs_layer,
    modulus_table,
    normal_form,
    order_of,
    struik_evaluate,
    struik_form,
    verify_consistency,
)
from nilcap.oracle import dihedral_model, free_word_coordinates, full_table_check, generator_isomorphic
from nilcap.term import WordExpr, format_expr, left_normed, parse_expr

__version__ = "0.1.0"

__all__ = [
    # Expressions
    "WordExpr",
    "parse_expr",
    "format_expr",
    "left_normed",
    # Hall bases
    "BasicCommutator",
    "BasisTable",
    "compare",
    "generate_basis",
    "witt_count",
    "is_basic",
    "from_expr",
    "shove",
    "shove_recursive",
    # Free nilpotent groups
    "FreeNilElement",
    "FreeNilpotentGroup",
    "RewriteResult",
    "free_group",
    "embed",
    "truncate",
    "rewrite_basic_pair",
    "commutate_with",
    "power_commutator_expansion",
    # Nilpotent products
    "GroupSpec",
    "DistinguishedBasis",
    "PcElement",
    "PcPresentation",
    "modulus_table",
    "build_group",
    "cached_build_group",
    "normal_form",
    "order_of",
    "lcs_layer",
    "struik_form",
    "struik_evaluate",
    "verify_consistency",
    "binom_reduction",
    # Centers and capability
    "CenterFormula",
    "CenterReport",
    "NotCentralReport",
    "Rule",
    "Verdict",
    "WitnessReport",
    "center_formula",
    "center_bruteforce",
    "center_report",
    "is_central",
    "subgroup_closure",
    "check_notcentral_identity",
    "capability_necessary",
    "capability_decide",
    "capability_verdict",
    "capability_witness",
    # Oracles
    "dihedral_model",
    "free_word_coordinates",
    "full_table_check",
    "generator_isomorphic",
    # Settings and caching
    "Settings",
    "load_settings",
    "RelationCache",
    # Exceptions
    "NilcapError",
    "ExprSyntaxError",
    "GeneratorIndexError",
    "ShoveUndefinedError",
    "NotBasicError",
    "BasisMismatchError",
    "ResourceLimitError",
    "ConsistencyError",
    "OutOfRangeError",
    "PreconditionError",
    "CacheFormatError",
]


def group(p: int, k: int, alphas: tuple[int, ...]) -> PcPresentation:
    """Convenience: the k-nilpotent product of cyclic groups of orders p^alpha_i."""
    return build_group(GroupSpec(p, k, tuple(alphas)))
