"""Command-line front door.

Subcommands: ``gw`` (one invariant), ``table`` (nd / nd_a / jfun tables),
``verify`` (identity suites), ``cache`` (export / import / stats).  All numeric
output is exact rational strings; given identical flags and seed, stdout bytes
are identical across runs.  Timing goes to stderr so it never perturbs that.

Exit codes: 0 success, 1 verification failure, 2 parse/parameter error,
3 unsupported target, 4 internal inconsistency, 5 I/O or cache-format error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from .algebra import (
    Target,
    monomial_degree,
    parse_target,
    rat_str,
    virtual_dimension,
)
from .cache import CacheFile
from .descend import DescBracket, DescendEngine, ladder_nd_a
from .errors import (
    CacheError,
    GwcalcError,
    InconsistencyError,
    QueryError,
    UnsupportedTargetError,
)
from .jfun import j_function
from .verify import SUITES, run_suite
from .wdvv import WdvvEngine, kontsevich_nd

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_PARSE = 2
EXIT_TARGET = 3
EXIT_INTERNAL = 4
EXIT_IO = 5

CACHE_ENV = "GWCALC_CACHE"
CONFIG_ENV = "GWCALC_CONFIG"


def _split_top_level(text: str) -> list:
    """Split on commas that are not inside parentheses."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise QueryError(f"unbalanced parentheses in {text!r}")
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if depth:
        raise QueryError(f"unbalanced parentheses in {text!r}")
    if cur or parts:
        parts.append("".join(cur))
    return [p.strip() for p in parts if p.strip()]


def _parse_monomial(token: str, target: Target) -> tuple:
    token = token.strip()
    if token.startswith("("):
        if not token.endswith(")"):
            raise QueryError(f"bad monomial {token!r}")
        try:
            exps = tuple(int(x) for x in token[1:-1].split(","))
        except ValueError as exc:
            raise QueryError(f"bad monomial {token!r}") from exc
    else:
        try:
            exps = (int(token),)
        except ValueError as exc:
            raise QueryError(f"bad monomial {token!r}") from exc
    if not target.valid_monomial(exps):
        raise QueryError(f"{token!r} is not a basis monomial of {target}")
    return exps


def parse_insertions(text: str, target: Target):
    """Parse the insertion grammar.

    Comma-separated items; each item is a codim monomial ("2", "(1,0)"),
    optionally repeated ("2x11", "(1,0)x3"), or a single descendant slot
    "psi<a>:<monomial>".
    """
    plains = []
    desc = None
    for item in _split_top_level(text):
        if item.startswith("psi"):
            head, _, mono = item.partition(":")
            if not mono:
                raise QueryError(f"descendant item {item!r} needs psi<a>:<monomial>")
            try:
                a = int(head[3:])
            except ValueError as exc:
                raise QueryError(f"bad descendant power in {item!r}") from exc
            if desc is not None:
                raise QueryError("at most one descendant insertion is supported")
            desc = (_parse_monomial(mono, target), a)
            continue
        reps = 1
        body = item
        if "x" in item and not item.startswith("("):
            body, _, mult = item.partition("x")
            reps = int(mult)
        elif item.startswith("(") and ")x" in item:
            body, _, mult = item.rpartition("x")
            reps = int(mult)
        plains.extend([_parse_monomial(body, target)] * reps)
    return plains, desc


def _parse_beta(text: str, target: Target) -> tuple:
    try:
        beta = tuple(int(x) for x in text.split(","))
    except ValueError as exc:
        raise QueryError(f"bad degree {text!r}") from exc
    if len(beta) != target.generators:
        raise QueryError(
            f"degree {text!r} needs {target.generators} component(s) for {target}"
        )
    if not target.is_effective(beta):
        raise QueryError(f"degree {text!r} is not effective")
    return beta


def _mono_label(m: tuple, target: Target) -> str:
    if target.generators == 1:
        return f"H^{m[0]}"
    return "(" + ",".join(str(e) for e in m) + ")"


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="gwcalc",
        description="Exact genus-0 Gromov-Witten invariants and identity checks.",
    )
    ap.add_argument("--cache", help="path of the persistent invariant cache")
    ap.add_argument("--config", help="JSON config file (flags take precedence)")
    sub = ap.add_subparsers(dest="command", required=True)

    gw = sub.add_parser("gw", help="compute one invariant")
    gw.add_argument("target", help="P<r> | P<r>xP<s>[x...] | CI:<n>:<l1,l2,...>")
    gw.add_argument("--d", required=True, help="curve degree(s), e.g. 3 or 1,1")
    gw.add_argument("--ins", required=True, help="insertions, e.g. 2x11 or 5,5 or 2,psi2:2")
    gw.add_argument("--engine", choices=("wdvv", "descend", "auto"), default="auto")

    table = sub.add_parser("table", help="emit nd / nd_a / jfun tables")
    table.add_argument("kind", choices=("nd", "nd_a", "jfun"))
    table.add_argument("--dmax", type=int, help="largest degree (nd)")
    table.add_argument("--d", help="degree (nd_a, jfun)")
    table.add_argument("--target", help="target for jfun tables")
    table.add_argument("--order", type=int, help="expansion depth for jfun")
    table.add_argument("--format", choices=("csv", "json"), default="csv")

    ver = sub.add_parser("verify", help="run an identity suite")
    ver.add_argument("suite", choices=SUITES)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--trials", type=int)
    ver.add_argument("--dmax", type=int)
    ver.add_argument("--beta-max", type=int, dest="beta_max")
    ver.add_argument("--a-max", type=int, dest="a_max")
    ver.add_argument("--target", action="append", help="restrict to target(s)")

    cache = sub.add_parser("cache", help="manage the persistent invariant cache")
    cache.add_argument("action", choices=("export", "import", "stats"))
    cache.add_argument("path", nargs="?", help="file to export to / import from")
    return ap


def _load_config(args) -> dict:
    path = args.config or os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    try:
        config = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise CacheError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise QueryError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise QueryError(f"config {path} must hold a JSON object")
    return config


def _cache_path(args, config) -> str | None:
    return args.cache or os.environ.get(CACHE_ENV) or config.get("cache_path")


def _load_cache(path) -> CacheFile:
    if path and Path(path).exists():
        return CacheFile.load(path)
    return CacheFile()


def _cmd_gw(args, config) -> int:
    target = parse_target(args.target)
    beta = _parse_beta(args.d, target)
    plains, desc = parse_insertions(args.ins, target)
    engine_name = args.engine
    if engine_name == "auto":
        engine_name = (
            "wdvv" if target.kind == "projective_space" and desc is None else "descend"
        )
    path = _cache_path(args, config)
    cache = _load_cache(path)

    if engine_name == "wdvv":
        if target.kind != "projective_space":
            raise UnsupportedTargetError("the wdvv engine handles projective spaces only")
        if desc is not None:
            raise UnsupportedTargetError("the wdvv engine handles ordinary insertions only")
        engine = WdvvEngine()
        cache.load_into(engine.memo)
        value = engine.gw(target, beta[0], [monomial_degree(m) for m in plains])
        memo = engine.memo
    else:
        engine = DescendEngine()
        cache.load_into(engine.memo)
        value = engine.bracket(DescBracket.make(target, beta, plains, desc))
        memo = engine.memo

    if path:
        cache.merge_store(memo)
        cache.save(path)

    total = sum(monomial_degree(m) for m in plains)
    if desc:
        total += monomial_degree(desc[0]) + desc[1]
    n = len(plains) + (1 if desc else 0)
    record = {
        "target": target.key,
        "beta": ",".join(str(x) for x in beta),
        "insertions": [_mono_label(m, target) for m in sorted(plains)]
        + ([f"psi{desc[1]}:{_mono_label(desc[0], target)}"] if desc else []),
        "value": rat_str(value),
        "engine": engine_name,
        "vdim_check": total == virtual_dimension(target, beta, n),
    }
    sys.stdout.write(json.dumps(record, sort_keys=True, indent=2) + "\n")
    return EXIT_OK


def _emit_table(rows, header, fmt) -> None:
    if fmt == "json":
        payload = [dict(zip(header, row)) for row in rows]
        sys.stdout.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
        return
    sys.stdout.write(",".join(header) + "\n")
    for row in rows:
        sys.stdout.write(",".join(str(x) for x in row) + "\n")


def _cmd_table(args, config) -> int:
    if args.kind == "nd":
        if args.dmax is None:
            raise QueryError("table nd needs --dmax")
        if args.dmax > 12:
            raise QueryError("--dmax bound is 12")
        rows = [(d, rat_str(kontsevich_nd(d))) for d in range(1, args.dmax + 1)]
        _emit_table(rows, ("d", "n_d"), args.format)
        return EXIT_OK
    if args.kind == "nd_a":
        if args.d is None:
            raise QueryError("table nd_a needs --d")
        d = int(args.d)
        if d > 6:
            raise QueryError("--d bound is 6 for nd_a tables")
        rows = [(a, rat_str(v)) for a, v in enumerate(ladder_nd_a(d))]
        _emit_table(rows, ("a", "n_d_a"), args.format)
        return EXIT_OK
    # jfun
    if not args.target or args.d is None:
        raise QueryError("table jfun needs --target and --d")
    target = parse_target(args.target)
    beta = _parse_beta(args.d, target)
    jf = j_function(target, beta, args.order)
    rows = []
    for e, cls in sorted(jf.series.items(), reverse=True):
        for m, c in cls.items():
            rows.append((e, _mono_label(m, target), rat_str(c)))
    _emit_table(rows, ("t_exp", "monomial", "coefficient"), args.format)
    return EXIT_OK


def _cmd_verify(args, config) -> int:
    params = {}
    if args.trials is not None:
        params["trials"] = args.trials
    if args.dmax is not None:
        params["dmax"] = args.dmax
    if args.beta_max is not None:
        params["beta_max"] = args.beta_max
    if args.a_max is not None:
        params["a_max"] = args.a_max
    if args.target:
        params["targets"] = args.target
    report = run_suite(args.suite, params, args.seed)
    sys.stdout.write(report.to_json(deterministic=True))
    sys.stderr.write(
        f"suite {report.suite}: {'pass' if report.ok else 'FAIL'}, "
        f"{report.instances} instances, {report.wall_ms:.0f} ms\n"
    )
    return EXIT_OK if report.ok else EXIT_VERIFY_FAIL


def _cmd_cache(args, config) -> int:
    path = _cache_path(args, config)
    if not path:
        raise QueryError("no cache path configured (flag --cache, env, or config)")
    current = _load_cache(path)
    if args.action == "stats":
        sys.stdout.write(json.dumps(current.stats(), sort_keys=True, indent=2) + "\n")
        return EXIT_OK
    if not args.path:
        raise QueryError(f"cache {args.action} needs a file path")
    if args.action == "export":
        current.save(args.path)
        return EXIT_OK
    incoming = CacheFile.load(args.path)
    current.merge_file(incoming)
    current.save(path)
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_PARSE
    try:
        config = _load_config(args)
        if args.command == "gw":
            return _cmd_gw(args, config)
        if args.command == "table":
            return _cmd_table(args, config)
        if args.command == "verify":
            return _cmd_verify(args, config)
        return _cmd_cache(args, config)
    except UnsupportedTargetError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_TARGET
    except InconsistencyError as exc:
        sys.stderr.write(f"internal inconsistency: {exc}\n")
        return EXIT_INTERNAL
    except CacheError as exc:
        sys.stderr.write(f"cache error: {exc}\n")
        return EXIT_IO
    except QueryError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARSE
    except OSError as exc:
        sys.stderr.write(f"i/o error: {exc}\n")
        return EXIT_IO
    except GwcalcError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    raise SystemExit(main())
