"""Exact genus-0 Gromov-Witten invariants via three independent algorithms.

* ``wdvv``: associativity-based reconstruction for projective spaces, plus
  the closed quadratic recursion for rational plane curves;
* ``jfun``: closed-form one-point J-series, descendants, and degree-zero
  brackets;
* ``descend``: J-seeded reconstruction of ordinary and one-descendant
  invariants for projective spaces, their products, and Fano complete
  intersections;
* ``verify``: deterministic identity suites tying the engines together.

All arithmetic is exact rational; there is no floating point anywhere.
"""

from .algebra import (
    CohClass,
    Rational,
    Target,
    TLaurent,
    complete_intersection,
    cup,
    integrate,
    laurent_coeff,
    laurent_mul,
    pairing_matrix,
    parse_target,
    product_of_projective_spaces,
    projective_space,
    rat_from_str,
    rat_str,
    virtual_dimension,
)
from .descend import (
    DescBracket,
    DescendEngine,
    TwistPolynomial,
    bracket,
    dilaton_reduce,
    divisor_reduce,
    ladder_nd_a,
    string_reduce,
    theorem3_residual,
    twist_polynomial,
)
from .jfun import (
    JFunction,
    degree_zero_bracket,
    j_function,
    j_product_check,
    one_point_descendant,
    psi_intersection,
)
from .verify import SUITES, SuiteReport, run_all_suites, run_suite
from .wdvv import (
    Bracket,
    MemoStore,
    WdvvEngine,
    gw,
    kontsevich_nd,
    reduce_axioms,
    wdvv_relation_sides,
)

__all__ = [
    "Bracket",
    "CohClass",
    "DescBracket",
    "DescendEngine",
    "JFunction",
    "MemoStore",
    "Rational",
    "SUITES",
    "SuiteReport",
    "TLaurent",
    "Target",
    "TwistPolynomial",
    "WdvvEngine",
    "bracket",
    "complete_intersection",
    "cup",
    "degree_zero_bracket",
    "dilaton_reduce",
    "divisor_reduce",
    "gw",
    "integrate",
    "j_function",
    "j_product_check",
    "kontsevich_nd",
    "ladder_nd_a",
    "laurent_coeff",
    "laurent_mul",
    "one_point_descendant",
    "pairing_matrix",
    "parse_target",
    "product_of_projective_spaces",
    "projective_space",
    "psi_intersection",
    "rat_from_str",
    "rat_str",
    "reduce_axioms",
    "run_all_suites",
    "run_suite",
    "string_reduce",
    "theorem3_residual",
    "twist_polynomial",
    "virtual_dimension",
    "wdvv_relation_sides",
]

__version__ = "0.1.0"
