"""Ordinary genus-0 invariants of projective spaces via associativity.

The reconstruction works over the hyperplane-power basis of ``P^r``.  A
bracket with an insertion ``H^k`` of codimension ``k >= 2`` is solved from
the associativity identity obtained by splitting ``H^k = H * H^(k-1)``:
equate the two boundary expansions of the four-point family (the second is
the first after exchanging one auxiliary insertion with the first divisor
slot), and isolate the single unknown term.  Everything else in the two sums
has smaller degree, fewer insertions, or a smaller distinguished power, so
the recursion grounds out in the two-point seed <H^r, H^r>_1 = 1.

The enumeration over index subsets collapses to sub-multiset splits weighted
by binomial multiplicities, which keeps repeated insertions cheap.
"""

from __future__ import annotations

import itertools
import logging
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Sequence

from . import _registry
from .algebra import Target, integrate_monomials, rat_str, virtual_dimension
from .errors import InconsistencyError, QueryError, UnsupportedTargetError

logger = logging.getLogger(__name__)

# Legal split policies. All pick the smallest codimension >= 2 as the slot to
# eliminate (no instance can then degenerate into solving T = T); they differ
# in which two insertions play the auxiliary roles and in the order of the
# divisor split. Results must not depend on the choice.
POLICIES = ("gamma_max", "gamma_min", "lm_swap")


def bracket_key(target: Target, beta, items: Iterable) -> str:
    """Canonical serialized key shared by both engines and the cache file.

    ``items`` are (monomial, psi_power) pairs; insertion order is irrelevant.
    """
    norm = sorted((tuple(m), int(a)) for m, a in items)
    parts = []
    for m, a in norm:
        tok = ".".join(str(e) for e in m)
        parts.append(f"{tok}@{a}" if a else tok)
    b = ",".join(str(x) for x in beta)
    return f"{target.key}|b={b}|{';'.join(parts)}"


@dataclass(frozen=True)
class Bracket:
    """Canonical ordinary/descendant bracket: target, curve class, insertions."""

    target: Target
    beta: tuple
    insertions: tuple  # sorted ((monomial, psi_power), ...)

    @classmethod
    def make(cls, target: Target, beta, insertions: Iterable) -> "Bracket":
        items = tuple(sorted((tuple(m), int(a)) for m, a in insertions))
        for m, a in items:
            if not target.valid_monomial(m):
                raise QueryError(f"{m} is not a basis monomial of {target}")
            if a < 0:
                raise QueryError("psi powers must be nonnegative")
        beta = tuple(beta)
        if not target.is_effective(beta):
            raise QueryError(f"{beta} is not effective on {target}")
        return cls(target, beta, items)

    @property
    def key(self) -> str:
        return bracket_key(self.target, self.beta, self.insertions)


class MemoStore:
    """Insert-once value store; conflicting re-insertion is a hard error."""

    def __init__(self):
        self._data: dict = {}

    def get(self, key: str):
        return self._data.get(key)

    def __contains__(self, key: str) -> bool:
        return key in self._data

    def __len__(self) -> int:
        return len(self._data)

    def insert(self, key: str, value: Fraction) -> None:
        old = self._data.get(key)
        if old is not None and old != value:
            raise InconsistencyError(
                f"memo conflict at {key}: {rat_str(old)} vs {rat_str(value)}"
            )
        self._data[key] = value

    def items(self):
        return self._data.items()

    def merge(self, other: dict) -> None:
        for k, v in other.items():
            self.insert(k, v)


def reduce_axioms(b: Bracket):
    """Strip unit and bare-divisor insertions; settle terminal cases.

    Returns either a terminal Fraction or a pair (scalar factor, reduced
    bracket) whose insertions all have codimension >= 2.  Only ordinary
    brackets (all psi powers zero) are accepted here.
    """
    _registry.record("reduce_axioms")
    if any(a for _, a in b.insertions):
        raise QueryError("axiom reduction handles ordinary brackets only")
    target, beta = b.target, b.beta
    codims = [sum(m) for m, _ in b.insertions]
    n = len(codims)
    if sum(codims) != virtual_dimension(target, beta, n):
        return Fraction(0)
    if not any(beta):
        if n == 3:
            return integrate_monomials([m for m, _ in b.insertions], target)
        logger.debug("degree-zero bracket with %d != 3 insertions: 0 (%s)", n, b.key)
        return Fraction(0)
    factor = Fraction(1)
    kept = []
    for m, _ in b.insertions:
        deg = sum(m)
        if deg == 0:
            return Fraction(0)  # unit insertion, positive degree
        if deg == 1:
            gen = m.index(1)
            factor *= beta[gen]
            continue
        kept.append((m, 0))
    if factor == 0:
        return Fraction(0)
    return factor, Bracket.make(target, beta, kept)


class WdvvEngine:
    """Reconstruction engine for ``P^r`` with a private memo store."""

    def __init__(self, policy: str = "gamma_max", memo: MemoStore | None = None):
        if policy not in POLICIES:
            raise QueryError(f"unknown policy {policy!r}; pick one of {POLICIES}")
        self.policy = policy
        self.memo = memo if memo is not None else MemoStore()
        self._active: set = set()

    # -- public ------------------------------------------------------------

    def gw(self, target: Target, d: int, codims: Sequence[int]) -> Fraction:
        """Ordinary invariant of P^r with insertions H^k, k in ``codims``."""
        _registry.record("gw")
        if target.kind != "projective_space":
            raise UnsupportedTargetError(f"{target} is not a projective space")
        if d < 0:
            raise QueryError("negative degree")
        r = target.factor_dims[0]
        for k in codims:
            if not 0 <= k <= r:
                raise QueryError(f"codimension {k} outside [0, {r}]")
        return self._value(target, d, tuple(sorted(codims)))

    # -- internals ----------------------------------------------------------

    def _value(self, target: Target, d: int, codims: tuple) -> Fraction:
        key = bracket_key(target, (d,), (((k,), 0) for k in codims))
        cached = self.memo.get(key)
        if cached is not None:
            return cached
        if key in self._active:
            raise InconsistencyError(f"cyclic reconstruction at {key}")
        self._active.add(key)
        try:
            value = self._evaluate(target, d, codims)
        finally:
            self._active.discard(key)
        self.memo.insert(key, value)
        return value

    def _evaluate(self, target: Target, d: int, codims: tuple) -> Fraction:
        r = target.factor_dims[0]
        red = reduce_axioms(
            Bracket.make(target, (d,), (((k,), 0) for k in codims))
        )
        if isinstance(red, Fraction):
            return red
        factor, reduced = red
        kept = tuple(sorted(m[0] for m, _ in reduced.insertions))
        n = len(kept)
        if n == 0:
            # On-dimension empty bracket: forces r = 1, d = 1, the single line.
            return factor
        assert n != 1, "one-point brackets of codim >= 2 cannot be on-dimension"
        if n == 2:
            # Two-point seeds by the dimension count: with both codims <= r the
            # filter forces d = 1 and codims (r, r); that invariant is 1.
            seed = Fraction(1) if (d == 1 and kept == (r, r)) else Fraction(0)
            return factor * seed
        return factor * self._solve(target, d, kept)

    def _solve(self, target: Target, d: int, codims: tuple) -> Fraction:
        """Isolate the bracket from the two boundary expansions."""
        k = codims[0]  # smallest codim; >= 2 here
        rest = list(codims[1:])
        if self.policy == "gamma_min":
            g1, g2 = rest[0], rest[1]
            middle = Counter(rest[2:])
        else:
            g1, g2 = rest[-1], rest[-2]
            middle = Counter(rest[:-2])
        if self.policy == "lm_swap":
            dl, dm = k - 1, 1
        else:
            dl, dm = 1, k - 1
        side1 = self._side_sum(target, d, middle, (g1, g2), (dl, dm), skip_full=True)
        side2 = self._side_sum(target, d, middle, (g1, dl), (g2, dm), skip_full=False)
        return side2 - side1

    def _side_sum(
        self,
        target: Target,
        d: int,
        middle: Counter,
        left_extra: tuple,
        right_extra: tuple,
        skip_full: bool,
    ) -> Fraction:
        """One boundary expansion, summed over degree and multiset splits.

        ``skip_full`` omits the (alpha=d, S=everything) block, which is where
        the solved-for bracket sits on the first side.
        """
        r = target.factor_dims[0]
        items = sorted(middle.items())
        counts = [c for _, c in items]
        total = Fraction(0)
        for take in itertools.product(*[range(c + 1) for c in counts]):
            mult = 1
            for c, t in zip(counts, take):
                mult *= comb(c, t)
            left_mid = []
            right_mid = []
            for (kk, _), t, c in zip(items, take, counts):
                left_mid.extend([kk] * t)
                right_mid.extend([kk] * (c - t))
            is_full = all(t == c for t, c in zip(take, counts))
            for alpha in range(d + 1):
                if skip_full and alpha == d and is_full:
                    continue
                left_codims = left_mid + list(left_extra)
                # The contracted slot's codim is pinned by the dimension filter.
                i = virtual_dimension(target, (alpha,), len(left_codims) + 1) - sum(left_codims)
                if not 0 <= i <= r:
                    continue
                j = r - i
                left = self._value(target, alpha, tuple(sorted(left_codims + [i])))
                if not left:
                    continue
                right_codims = tuple(sorted(right_mid + list(right_extra) + [j]))
                right = self._value(target, d - alpha, right_codims)
                if right:
                    total += mult * left * right
        return total


_DEFAULT_ENGINE = WdvvEngine()


def gw(target: Target, d: int, codims: Sequence[int], engine: WdvvEngine | None = None) -> Fraction:
    return (engine or _DEFAULT_ENGINE).gw(target, d, codims)


def wdvv_relation_sides(
    target: Target,
    d: int,
    gammas: Sequence[int],
    dl: int,
    dm: int,
    engine: WdvvEngine | None = None,
) -> tuple:
    """Both boundary expansions, fully evaluated; they must be equal.

    ``gammas`` are insertion codims; the last two play the auxiliary roles,
    ``dl`` and ``dm`` are the codims of the two extra divisor monomials.
    """
    _registry.record("wdvv_relation_sides")
    eng = engine or _DEFAULT_ENGINE
    if target.kind != "projective_space":
        raise UnsupportedTargetError(f"{target} is not a projective space")
    if len(gammas) < 2:
        raise QueryError("need at least the two auxiliary insertions")
    if min(dl, dm) < 1:
        raise QueryError("divisor slots need codimension >= 1")
    g1, g2 = gammas[-2], gammas[-1]
    middle = Counter(gammas[:-2])
    side1 = eng._side_sum(target, d, middle, (g1, g2), (dl, dm), skip_full=False)
    side2 = eng._side_sum(target, d, middle, (g1, dl), (g2, dm), skip_full=False)
    return side1, side2


_ND_CACHE = [None, Fraction(1)]  # n_1 = 1


def kontsevich_nd(d: int) -> Fraction:
    """Rational plane curves of degree d through 3d-1 points, by the closed
    quadratic recursion with seed n_1 = 1."""
    _registry.record("kontsevich_nd")
    if d < 1:
        raise QueryError("degree must be >= 1")
    while len(_ND_CACHE) <= d:
        dd = len(_ND_CACHE)
        total = Fraction(0)
        for e in range(1, dd):
            ne, nde = _ND_CACHE[e], _ND_CACHE[dd - e]
            total += ne * nde * (
                e ** 2 * (dd - e) ** 2 * comb(3 * dd - 4, 3 * e - 2)
                - e * (dd - e) ** 3 * comb(3 * dd - 4, 3 * e - 3)
            )
        _ND_CACHE.append(total)
    return _ND_CACHE[d]
