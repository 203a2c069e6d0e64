"""Executable identity suites tying the engines together.

Every suite draws a deterministic pseudo-random instance family from a seed,
evaluates an exact identity on engine outputs, and reports failures with
canonical keys.  Degenerate draws (off-dimension brackets, vanishing cup
products) are kept on purpose: the zero filters are where silent bugs hide.
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

from . import _registry
from .algebra import (
    Target,
    monomial_degree,
    parse_target,
    projective_space,
    rat_str,
    virtual_dimension,
)
from .descend import (
    DescBracket,
    DescendEngine,
    dilaton_reduce,
    divisor_reduce,
    ladder_nd_a,
    string_reduce,
)
from .errors import QueryError
from .jfun import j_product_check
from .wdvv import Bracket, WdvvEngine, kontsevich_nd, reduce_axioms, wdvv_relation_sides

SUITES = (
    "wdvv",
    "string",
    "dilaton",
    "divisor",
    "theorem3",
    "cross_engine",
    "product_swap",
    "dimension_filter",
)

_BOUNDS = {"trials": 500, "dmax": 6, "beta_max": 3, "a_max": 4}

_DEFAULTS = {
    "wdvv": {"targets": ["P2", "P3"], "dmax": 3, "trials": 50},
    "string": {"targets": ["P2", "P3", "P1xP1", "CI:6:5"], "beta_max": 2, "trials": 50},
    "dilaton": {"targets": ["P2", "P3", "P1xP1", "CI:6:5"], "beta_max": 2, "trials": 50},
    "divisor": {"targets": ["P2", "P3", "P1xP1", "CI:6:5"], "beta_max": 2, "trials": 50},
    "theorem3": {
        "targets": ["P2", "P3", "P1xP1", "CI:6:5"],
        "beta_max": 2,
        "trials": 25,
        "a_max": 2,
    },
    "cross_engine": {"dmax": 5, "trials": 20},
    "product_swap": {"beta_max": 2, "trials": 20},
    "dimension_filter": {"targets": ["P2", "P3", "P1xP1", "CI:6:5"], "trials": 100},
}


@dataclass
class SuiteReport:
    """Outcome of one identity suite run."""

    suite: str
    instances: int
    failures: list
    seed: int
    wall_ms: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self, deterministic: bool = True) -> str:
        payload = {
            "suite": self.suite,
            "instances": self.instances,
            "failures": self.failures,
            "seed": self.seed,
            "pass": self.ok,
        }
        if not deterministic:
            payload["wall_ms"] = round(self.wall_ms, 3)
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _params(name: str, overrides: dict | None) -> dict:
    if name not in SUITES:
        raise QueryError(f"unknown suite {name!r}; pick one of {SUITES}")
    params = dict(_DEFAULTS[name])
    params.update(overrides or {})
    for key, bound in _BOUNDS.items():
        if key in params and params[key] > bound:
            raise QueryError(f"{name}: parameter {key}={params[key]} exceeds bound {bound}")
    return params


def _random_monomial(rng: random.Random, target: Target, min_deg: int = 0, max_deg=None):
    basis = [m for m in target.basis() if monomial_degree(m) >= min_deg]
    if max_deg is not None:
        basis = [m for m in basis if monomial_degree(m) <= max_deg]
    return basis[rng.randrange(len(basis))]


def _random_beta(rng: random.Random, target: Target, beta_max: int):
    while True:
        beta = tuple(rng.randint(0, beta_max) for _ in range(target.generators))
        if any(beta) and sum(beta) <= beta_max:
            return beta


def run_suite(name: str, params: dict | None = None, seed: int = 0) -> SuiteReport:
    """Run one named identity suite over a deterministic instance family."""
    params = _params(name, params)
    rng = random.Random(seed)
    start = time.monotonic()
    runner = globals()[f"_suite_{name}"]
    instances, failures = runner(params, rng)
    wall = (time.monotonic() - start) * 1000.0
    return SuiteReport(name, instances, failures, seed, wall)


def run_all_suites(seed: int = 0, params: dict | None = None) -> dict:
    """Run every suite once and assert the operation-coverage contract."""
    _registry.reset()
    reports = {}
    for name in SUITES:
        reports[name] = run_suite(name, (params or {}).get(name), seed)
    missing = _registry.untouched()
    if missing:
        raise QueryError(f"suite union failed to touch operations: {sorted(missing)}")
    return reports


# ---------------------------------------------------------------------------
# individual suites
# ---------------------------------------------------------------------------


def _fail(failures: list, key: str, expected, actual) -> None:
    failures.append(
        {
            "key": key,
            "expected": expected if isinstance(expected, str) else rat_str(expected),
            "actual": actual if isinstance(actual, str) else rat_str(actual),
        }
    )


def _suite_wdvv(params, rng):
    engine = WdvvEngine()
    failures = []
    instances = 0
    targets = [parse_target(t) for t in params["targets"]]
    for _ in range(params["trials"]):
        X = targets[rng.randrange(len(targets))]
        r = X.factor_dims[0]
        d = rng.randint(1, params["dmax"])
        m = rng.randint(2, 4)
        gammas = [rng.randint(0, r) for _ in range(m)]
        dl = rng.randint(1, r)
        dm = rng.randint(1, r)
        instances += 1
        s1, s2 = wdvv_relation_sides(X, d, gammas, dl, dm, engine)
        if s1 != s2:
            _fail(failures, f"wdvv:{X.key}|d={d}|g={gammas}|dl={dl}|dm={dm}", s1, s2)
        # axiom reduction must commute with evaluation
        codims = [rng.randint(0, r) for _ in range(rng.randint(3, 5))]
        b = Bracket.make(X, (d,), (((k,), 0) for k in codims))
        red = reduce_axioms(b)
        whole = engine.gw(X, d, codims)
        if isinstance(red, Fraction):
            redval = red
        else:
            factor, reduced = red
            redval = factor * engine.gw(X, d, [m0[0] for m0, _ in reduced.insertions])
        instances += 1
        if whole != redval:
            _fail(failures, f"reduce:{b.key}", whole, redval)
    return instances, failures


def _one_descendant_instance(rng, X, beta_max, with_desc=True):
    beta = _random_beta(rng, X, beta_max)
    plains = [_random_monomial(rng, X) for _ in range(rng.randint(0, 3))]
    desc = None
    if with_desc and rng.random() < 0.7:
        desc = (_random_monomial(rng, X), rng.randint(1, 3))
    return beta, plains, desc


def _suite_string(params, rng):
    engine = DescendEngine()
    failures = []
    instances = 0
    targets = [parse_target(t) for t in params["targets"]]
    for _ in range(params["trials"]):
        X = targets[rng.randrange(len(targets))]
        beta, plains, desc = _one_descendant_instance(rng, X, params["beta_max"])
        b = DescBracket.make(X, beta, plains + [X.zero_class()], desc)
        instances += 1
        lhs = engine.bracket(b)
        rhs = sum(
            (c * engine.bracket(t) for c, t in string_reduce(b)), Fraction(0)
        )
        if lhs != rhs:
            _fail(failures, f"string:{b.key}", rhs, lhs)
    return instances, failures


def _suite_dilaton(params, rng):
    engine = DescendEngine()
    failures = []
    instances = 0
    targets = [parse_target(t) for t in params["targets"]]
    for _ in range(params["trials"]):
        X = targets[rng.randrange(len(targets))]
        beta, plains, _ = _one_descendant_instance(rng, X, params["beta_max"], with_desc=False)
        b = DescBracket.make(X, beta, plains, (X.zero_class(), 1))
        instances += 1
        lhs = engine.bracket(b)
        rhs = sum(
            (c * engine.bracket(t) for c, t in dilaton_reduce(b)), Fraction(0)
        )
        if lhs != rhs:
            _fail(failures, f"dilaton:{b.key}", rhs, lhs)
    return instances, failures


def _suite_divisor(params, rng):
    engine = DescendEngine()
    failures = []
    instances = 0
    targets = [parse_target(t) for t in params["targets"]]
    for _ in range(params["trials"]):
        X = targets[rng.randrange(len(targets))]
        beta, plains, desc = _one_descendant_instance(rng, X, params["beta_max"])
        h = _random_monomial(rng, X, min_deg=1, max_deg=1)
        b = DescBracket.make(X, beta, plains + [h], desc)
        instances += 1
        lhs = engine.bracket(b)
        rhs = sum(
            (c * engine.bracket(t) for c, t in divisor_reduce(b)), Fraction(0)
        )
        if lhs != rhs:
            _fail(failures, f"divisor:{b.key}", rhs, lhs)
    return instances, failures


def _suite_theorem3(params, rng):
    engine = DescendEngine()
    failures = []
    instances = 0
    targets = [parse_target(t) for t in params["targets"]]
    for _ in range(params["trials"]):
        X = targets[rng.randrange(len(targets))]
        beta = _random_beta(rng, X, params["beta_max"])
        # cap p's codimension to keep the deepest CI instances quick
        p = _random_monomial(rng, X, min_deg=1, max_deg=min(3, X.dim))
        gammas = [_random_monomial(rng, X) for _ in range(rng.randint(1, 3))]
        instances += 1
        residuals = engine.theorem3_residual(X, beta, p, gammas, params["a_max"])
        if any(residuals):
            key = f"theorem3:{X.key}|b={beta}|p={p}|g={gammas}"
            _fail(failures, key, "0", str([rat_str(x) for x in residuals]))
    return instances, failures


def _suite_cross_engine(params, rng):
    wdvv_engine = WdvvEngine()
    desc_engine = DescendEngine()
    p2 = projective_space(2)
    p3 = projective_space(3)
    failures = []
    instances = 0
    # closed recursion vs both reconstructions on the plane
    for d in range(1, params["dmax"] + 1):
        nd = kontsevich_nd(d)
        via_wdvv = wdvv_engine.gw(p2, d, [2] * (3 * d - 1))
        via_desc = desc_engine.bracket_of(p2, (d,), [(2,)] * (3 * d - 1))
        instances += 1
        if not (nd == via_wdvv == via_desc):
            _fail(
                failures,
                f"nd:{d}",
                rat_str(nd),
                f"wdvv={rat_str(via_wdvv)} descend={rat_str(via_desc)}",
            )
        # divisor-dressed variants
        for extra in (1, 2):
            instances += 1
            lhs = wdvv_engine.gw(p2, d, [2] * (3 * d - 1) + [1] * extra)
            rhs = desc_engine.bracket_of(p2, (d,), [(2,)] * (3 * d - 1) + [(1,)] * extra)
            if lhs != rhs or lhs != nd * Fraction(d) ** extra:
                _fail(failures, f"nd-dressed:{d}+{extra}", rat_str(nd * d ** extra), rat_str(lhs))
    # descendant ladder vs direct evaluation; total insertion count is 3d-1-a
    for d in (1, 2, 3):
        ladder = ladder_nd_a(d)
        for a, expected in enumerate(ladder):
            instances += 1
            n_plain = 3 * d - 1 - a - (1 if a else 0)
            desc = ((2,), a) if a else None
            got = desc_engine.bracket_of(p2, (d,), [(2,)] * n_plain, desc)
            if got != expected:
                _fail(failures, f"ladder:{d}:{a}", rat_str(expected), rat_str(got))
    # random space instances
    for _ in range(params["trials"]):
        d = rng.randint(1, 2)
        n = rng.randint(3, 6)
        codims = [rng.randint(0, 3) for _ in range(n)]
        instances += 1
        lhs = wdvv_engine.gw(p3, d, codims)
        rhs = desc_engine.bracket_of(p3, (d,), [(k,) for k in codims])
        if lhs != rhs:
            _fail(failures, f"cross:P3|d={d}|{sorted(codims)}", rat_str(lhs), rat_str(rhs))
    return instances, failures


def _suite_product_swap(params, rng):
    engine = DescendEngine()
    X = parse_target("P1xP1")
    failures = []
    instances = 0
    betas = [
        (a, b)
        for a in range(params["beta_max"] + 1)
        for b in range(params["beta_max"] + 1)
        if 0 < a + b <= params["beta_max"]
    ]
    for beta in betas:
        report = j_product_check(X, beta)
        instances += 1
        if not report.ok:
            _fail(failures, f"jprod:{X.key}|b={beta}", "match", str(report.mismatches))
    for _ in range(params["trials"]):
        beta = betas[rng.randrange(len(betas))]
        n = rng.randint(2, 5)
        plains = [_random_monomial(rng, X) for _ in range(n - 1)]
        needed = virtual_dimension(X, beta, n) - sum(monomial_degree(m) for m in plains)
        options = [m for m in X.basis() if monomial_degree(m) == needed]
        if not options:
            continue
        plains.append(options[rng.randrange(len(options))])
        instances += 1
        lhs = engine.bracket_of(X, beta, plains)
        rhs = engine.bracket_of(
            X, (beta[1], beta[0]), [(m[1], m[0]) for m in plains]
        )
        if lhs != rhs:
            _fail(failures, f"swap:{X.key}|b={beta}|{sorted(plains)}", rat_str(lhs), rat_str(rhs))
    return instances, failures


def _suite_dimension_filter(params, rng):
    wdvv_engine = WdvvEngine()
    desc_engine = DescendEngine()
    failures = []
    instances = 0
    targets = [parse_target(t) for t in params["targets"]]
    for _ in range(params["trials"]):
        X = targets[rng.randrange(len(targets))]
        beta = tuple(rng.randint(0, 2) for _ in range(X.generators))
        n = rng.randint(0, 5)
        plains = [_random_monomial(rng, X) for _ in range(n)]
        total = sum(monomial_degree(m) for m in plains)
        if not any(beta) or total == virtual_dimension(X, beta, n):
            continue  # only off-dimension draws belong to this suite
        instances += 1
        got = desc_engine.bracket_of(X, beta, plains)
        if got != 0:
            _fail(failures, f"dim:{X.key}|b={beta}|{sorted(plains)}", "0", rat_str(got))
        if X.kind == "projective_space":
            instances += 1
            got = wdvv_engine.gw(X, beta[0], [monomial_degree(m) for m in plains])
            if got != 0:
                _fail(failures, f"dim-gw:{X.key}|b={beta}|{sorted(plains)}", "0", rat_str(got))
    return instances, failures
