"""Exact coefficient arithmetic for the invariant engines.

Everything is computed over arbitrary-precision rationals
(``fractions.Fraction``); no floating point appears anywhere in the package.
Cohomology classes live in the subring of H*(X) generated by divisor classes,
for three families of targets:

* projective spaces ``P^r``,
* finite products of projective spaces,
* Fano complete intersections ``CI(n, [l_1..l_r])`` in ``P^n`` with
  ``sum(l_i) < n`` and complex dimension ``n - r >= 3``.

A class is a map from basis monomials (exponent tuples in the divisor
generators, one exponent per generator, capped by the factor dimension) to
rational coefficients.  Curve classes are tuples of nonnegative integers,
one per generator; the effective cone is the componentwise-nonnegative
orthant.

Laurent polynomials in the formal variable ``t`` carry an explicit validity
window ``[lo, hi]``: reading a coefficient outside the window raises
``WindowError`` rather than silently returning zero.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Mapping

from .errors import QueryError, UnsupportedTargetError, WindowError

Rational = Fraction
Monomial = tuple  # exponent tuple, one entry per divisor generator
CurveClass = tuple  # degree tuple, one entry per divisor generator


def rat_str(x: Fraction) -> str:
    """Serialize a rational as "p/q", or "p" when the denominator is 1."""
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def rat_from_str(s: str) -> Fraction:
    return Fraction(s)


# ---------------------------------------------------------------------------
# Targets
# ---------------------------------------------------------------------------

KIND_PROJECTIVE = "projective_space"
KIND_PRODUCT = "product"
KIND_CI = "complete_intersection"


@dataclass(frozen=True)
class Target:
    """Descriptor of a supported target variety.

    ``factor_dims`` caps the exponent of each divisor generator: ``(r,)`` for
    ``P^r``, ``(r_1, ..., r_k)`` for a product, and ``(n - r,)`` for a
    complete intersection (single generator, nilpotent past the dimension).
    """

    kind: str
    factor_dims: tuple
    ambient_dim: int = 0          # complete intersections only
    multidegree: tuple = ()       # complete intersections only

    @property
    def dim(self) -> int:
        return sum(self.factor_dims)

    @property
    def generators(self) -> int:
        return len(self.factor_dims)

    @property
    def top_integral(self) -> Fraction:
        if self.kind == KIND_CI:
            deg = 1
            for l in self.multidegree:
                deg *= l
            return Fraction(deg)
        return Fraction(1)

    @property
    def anticanonical(self) -> tuple:
        """Pairing of -K_X with each generator's curve class."""
        if self.kind == KIND_PROJECTIVE:
            return (self.factor_dims[0] + 1,)
        if self.kind == KIND_PRODUCT:
            return tuple(r + 1 for r in self.factor_dims)
        return (self.ambient_dim + 1 - sum(self.multidegree),)

    @property
    def key(self) -> str:
        if self.kind == KIND_PROJECTIVE:
            return f"P{self.factor_dims[0]}"
        if self.kind == KIND_PRODUCT:
            return "x".join(f"P{r}" for r in self.factor_dims)
        ls = ",".join(str(l) for l in self.multidegree)
        return f"CI:{self.ambient_dim}:{ls}"

    def minus_k_dot(self, beta: CurveClass) -> int:
        return sum(a * b for a, b in zip(self.anticanonical, beta))

    def zero_class(self) -> CurveClass:
        return (0,) * self.generators

    def is_effective(self, beta: CurveClass) -> bool:
        return len(beta) == self.generators and all(b >= 0 for b in beta)

    def basis(self) -> list:
        """Monomial basis of the divisor subring, in canonical (lex) order."""
        ranges = [range(r + 1) for r in self.factor_dims]
        return [tuple(e) for e in itertools.product(*ranges)]

    def top_monomial(self) -> Monomial:
        return tuple(self.factor_dims)

    def valid_monomial(self, m: Monomial) -> bool:
        return (
            len(m) == self.generators
            and all(0 <= e <= cap for e, cap in zip(m, self.factor_dims))
        )

    def __str__(self) -> str:
        return self.key


def projective_space(r: int) -> Target:
    if r < 1:
        raise UnsupportedTargetError(f"P^{r} is not supported (need r >= 1)")
    return Target(KIND_PROJECTIVE, (r,))


def product_of_projective_spaces(dims: Iterable[int]) -> Target:
    dims = tuple(dims)
    if len(dims) < 2:
        raise UnsupportedTargetError("a product needs at least two factors")
    if any(r < 1 for r in dims):
        raise UnsupportedTargetError("every product factor must be some P^r, r >= 1")
    return Target(KIND_PRODUCT, dims)


def complete_intersection(n: int, multidegree: Iterable[int]) -> Target:
    ls = tuple(multidegree)
    if not ls or any(l < 1 for l in ls):
        raise UnsupportedTargetError("multidegree entries must be positive")
    if sum(ls) >= n:
        raise UnsupportedTargetError(
            f"CI({n}, {list(ls)}) has sum of degrees >= n; outside the supported regime"
        )
    dim = n - len(ls)
    if dim < 3:
        raise UnsupportedTargetError(
            f"CI({n}, {list(ls)}) has dimension {dim} < 3; construction rejected"
        )
    return Target(KIND_CI, (dim,), ambient_dim=n, multidegree=ls)


def parse_target(spec: str) -> Target:
    """Parse "P<r>", "P<r>xP<s>[x...]", or "CI:<n>:<l1,l2,...>"."""
    spec = spec.strip()
    if spec.startswith("CI:"):
        parts = spec.split(":")
        if len(parts) != 3:
            raise QueryError(f"bad target spec {spec!r}")
        try:
            n = int(parts[1])
            ls = [int(x) for x in parts[2].split(",")]
        except ValueError as exc:
            raise QueryError(f"bad target spec {spec!r}") from exc
        return complete_intersection(n, ls)
    factors = spec.split("x")
    dims = []
    for f in factors:
        if not f.startswith("P"):
            raise QueryError(f"bad target spec {spec!r}")
        try:
            dims.append(int(f[1:]))
        except ValueError as exc:
            raise QueryError(f"bad target spec {spec!r}") from exc
    if len(dims) == 1:
        return projective_space(dims[0])
    return product_of_projective_spaces(dims)


# ---------------------------------------------------------------------------
# Cohomology classes
# ---------------------------------------------------------------------------


def monomial_degree(m: Monomial) -> int:
    return sum(m)


def mono_cup(a: Monomial, b: Monomial, target: Target):
    """Product of two basis monomials; None when it exceeds a nilpotency cap."""
    out = tuple(x + y for x, y in zip(a, b))
    if all(e <= cap for e, cap in zip(out, target.factor_dims)):
        return out
    return None


class CohClass:
    """Element of the divisor subring, as exact coefficients over monomials."""

    __slots__ = ("target", "coeffs")

    def __init__(self, target: Target, coeffs: Mapping | None = None):
        clean = {}
        for m, c in (coeffs or {}).items():
            m = tuple(m)
            if not target.valid_monomial(m):
                raise QueryError(f"monomial {m} is not a basis monomial of {target}")
            c = Fraction(c)
            if c:
                clean[m] = c
        self.target = target
        self.coeffs = clean

    @classmethod
    def unit(cls, target: Target) -> "CohClass":
        return cls(target, {target.zero_class(): Fraction(1)})

    @classmethod
    def monomial(cls, target: Target, m: Monomial, coeff=1) -> "CohClass":
        return cls(target, {tuple(m): Fraction(coeff)})

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, CohClass):
            return self.target == other.target and self.coeffs == other.coeffs
        if other == 0:
            return not self.coeffs
        return NotImplemented

    def __hash__(self):
        return hash((self.target, tuple(sorted(self.coeffs.items()))))

    def _check(self, other: "CohClass") -> None:
        if self.target != other.target:
            raise QueryError("classes live over different targets")

    def __add__(self, other: "CohClass") -> "CohClass":
        self._check(other)
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, Fraction(0)) + c
        return CohClass(self.target, out)

    def __neg__(self) -> "CohClass":
        return CohClass(self.target, {m: -c for m, c in self.coeffs.items()})

    def __sub__(self, other: "CohClass") -> "CohClass":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, CohClass):
            self._check(other)
            out = {}
            for ma, ca in self.coeffs.items():
                for mb, cb in other.coeffs.items():
                    m = mono_cup(ma, mb, self.target)
                    if m is not None:
                        out[m] = out.get(m, Fraction(0)) + ca * cb
            return CohClass(self.target, out)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def scale(self, c) -> "CohClass":
        c = Fraction(c)
        return CohClass(self.target, {m: v * c for m, v in self.coeffs.items()})

    def items(self) -> Iterator:
        return iter(sorted(self.coeffs.items()))

    def __repr__(self) -> str:
        if not self.coeffs:
            return "0"
        gens = self.target.generators
        parts = []
        for m, c in sorted(self.coeffs.items()):
            if monomial_degree(m) == 0:
                parts.append(rat_str(c))
                continue
            if gens == 1:
                name = "H" if m[0] == 1 else f"H^{m[0]}"
            else:
                name = "*".join(
                    f"H{i + 1}" if e == 1 else f"H{i + 1}^{e}"
                    for i, e in enumerate(m)
                    if e
                )
            parts.append(name if c == 1 else f"{rat_str(c)}*{name}")
        return " + ".join(parts)


def cup(a: CohClass, b: CohClass, target: Target) -> CohClass:
    """Cup product in the divisor subring, truncated past dim(X)."""
    if a.target != target or b.target != target:
        raise QueryError("cup: mismatched target basis")
    return a * b


def integrate(a: CohClass, target: Target) -> Fraction:
    """Integral over X: coefficient of the top monomial times the top integral."""
    if a.target != target:
        raise QueryError("integrate: mismatched target basis")
    return a.coeffs.get(target.top_monomial(), Fraction(0)) * target.top_integral


def integrate_monomials(monomials: Iterable[Monomial], target: Target) -> Fraction:
    """Integral of a product of basis monomials."""
    total = target.zero_class()
    for m in monomials:
        total = tuple(x + y for x, y in zip(total, m))
    if total == target.top_monomial():
        return target.top_integral
    return Fraction(0)


def virtual_dimension(target: Target, beta: CurveClass, n: int) -> int:
    """dim(X) + (-K_X . beta) + n - 3."""
    if n < 0:
        raise QueryError("negative number of insertions")
    if not target.is_effective(beta):
        raise QueryError(f"{beta} is not an effective class on {target}")
    return target.dim + target.minus_k_dot(beta) + n - 3


def pairing_matrix(target: Target):
    """Intersection matrix g and its exact inverse over the monomial basis."""
    basis = target.basis()
    g = [
        [integrate_monomials((a, b), target) for b in basis]
        for a in basis
    ]
    ginv = _invert_exact(g)
    return g, ginv


def _invert_exact(mat):
    """Gauss-Jordan inverse over Fractions; raises on a singular matrix."""
    n = len(mat)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(mat)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            raise QueryError("pairing matrix is singular")
        a[col], a[pivot] = a[pivot], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


@lru_cache(maxsize=None)
def pairing_pairs(target: Target) -> tuple:
    """Nonzero entries of the inverse pairing, as (monomial_i, monomial_j, g^ij)."""
    basis = target.basis()
    _, ginv = pairing_matrix(target)
    out = []
    for i, mi in enumerate(basis):
        for j, mj in enumerate(basis):
            if ginv[i][j]:
                out.append((mi, mj, ginv[i][j]))
    return tuple(out)


# ---------------------------------------------------------------------------
# Truncated Laurent polynomials in t
# ---------------------------------------------------------------------------


class TLaurent:
    """Finite Laurent polynomial in t with Rational or CohClass coefficients.

    The window ``[lo, hi]`` delimits the exponents whose coefficients are
    guaranteed correct; coefficients are stored only inside it.  Window
    bookkeeping under arithmetic: sums take the union hull, products add
    endpoints.  All series in this package are constructed exactly (divisor
    generators are nilpotent, so geometric expansions terminate); windows
    shrink only when a series is explicitly clipped to a requested order.
    """

    __slots__ = ("coeffs", "lo", "hi")

    def __init__(self, coeffs: Mapping | None = None, window: tuple | None = None):
        clean = {e: c for e, c in (coeffs or {}).items() if c}
        if window is None:
            if clean:
                window = (min(clean), max(clean))
            else:
                window = (0, 0)
        lo, hi = window
        if lo > hi:
            raise WindowError(f"empty window [{lo}, {hi}]")
        for e in clean:
            if not lo <= e <= hi:
                raise WindowError(f"coefficient at t^{e} lies outside window [{lo}, {hi}]")
        self.coeffs = clean
        self.lo = lo
        self.hi = hi

    @property
    def window(self) -> tuple:
        return (self.lo, self.hi)

    def coeff(self, e: int):
        """Coefficient of t^e; raises WindowError outside the window."""
        if not self.lo <= e <= self.hi:
            raise WindowError(
                f"t^{e} is outside the validity window [{self.lo}, {self.hi}]"
            )
        return self.coeffs.get(e, Fraction(0))

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, TLaurent):
            return self.coeffs == other.coeffs
        return NotImplemented

    def __add__(self, other: "TLaurent") -> "TLaurent":
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            cur = out.get(e)
            out[e] = c if cur is None else cur + c
        return TLaurent(
            out, (min(self.lo, other.lo), max(self.hi, other.hi))
        )

    def __neg__(self) -> "TLaurent":
        return TLaurent({e: -c for e, c in self.coeffs.items()}, self.window)

    def __sub__(self, other: "TLaurent") -> "TLaurent":
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, TLaurent):
            return self.scale(other)
        out = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = e1 + e2
                term = c1 * c2
                cur = out.get(e)
                out[e] = term if cur is None else cur + term
        return TLaurent(out, (self.lo + other.lo, self.hi + other.hi))

    def scale(self, c) -> "TLaurent":
        """Multiply every coefficient by a scalar or class (same t-exponents)."""
        return TLaurent({e: v * c for e, v in self.coeffs.items()}, self.window)

    def map_coeffs(self, fn) -> "TLaurent":
        return TLaurent({e: fn(c) for e, c in self.coeffs.items()}, self.window)

    def clip(self, lo: int) -> "TLaurent":
        """Discard coefficients below ``lo`` and narrow the window accordingly."""
        if lo > self.hi:
            raise WindowError(f"clip to [{lo}, ...] leaves nothing of [{self.lo}, {self.hi}]")
        if lo <= self.lo:
            return self
        return TLaurent({e: c for e, c in self.coeffs.items() if e >= lo}, (lo, self.hi))

    def items(self) -> Iterator:
        return iter(sorted(self.coeffs.items()))

    def __repr__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for e, c in sorted(self.coeffs.items(), reverse=True):
            terms.append(f"({c!r})*t^{e}" if e else f"({c!r})")
        return " + ".join(terms)


def laurent_mul(f: TLaurent, g: TLaurent) -> TLaurent:
    return f * g


def laurent_coeff(f: TLaurent, e: int):
    return f.coeff(e)


def one_t(value=1) -> TLaurent:
    return TLaurent({0: Fraction(value)})
