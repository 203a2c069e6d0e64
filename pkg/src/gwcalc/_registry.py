"""Call-count registry backing the verification harness coverage check."""

from collections import Counter

_COUNTS: Counter = Counter()

# Every public engine operation must be hit at least once by the union of
# the verification suites; `gwcalc.verify.run_all_suites` asserts this.
TRACKED_OPS = frozenset({
    "gw",
    "kontsevich_nd",
    "wdvv_relation_sides",
    "reduce_axioms",
    "j_function",
    "one_point_descendant",
    "psi_intersection",
    "degree_zero_bracket",
    "j_product_check",
    "bracket",
    "theorem3_residual",
    "string_reduce",
    "dilaton_reduce",
    "divisor_reduce",
    "ladder_nd_a",
})


def record(op: str) -> None:
    _COUNTS[op] += 1


def counts() -> dict:
    return dict(_COUNTS)


def untouched() -> set:
    return set(TRACKED_OPS) - {op for op, c in _COUNTS.items() if c > 0}


def reset() -> None:
    _COUNTS.clear()
