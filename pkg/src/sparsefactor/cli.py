"""Command line front end.

Every subcommand is a thin wrapper around exactly one library operation:
parse the input polynomial(s), build an AlgoParams record from explicit
flags, call the operation, print one JSON object.  Nothing here contains
algorithmic logic, and nothing here uses randomness, so identical
invocations produce byte-identical output (timing fields are zeroed
under --repeatable).

Products too large to expand are passed as JSON manifests
({"product": ["<poly>", ...], "s": int, "d": int}) or inline as
"(f1)*(f2)*...", and reach the library as blackboxes.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import time
from typing import Optional, Sequence

from . import algos
from .blackbox import BlackBox, query
from .config import AlgoParams
from .errors import (CoeffOutOfRange, PolySyntaxError, ToolkitError,
                     UnknownVariable)
from .ff import FieldDesc, build_extension
from .gen import TASKS, m_for
from .oracle import (OracleReport, brute_divisors, brute_factor,
                     selftest_instances)
from .poly import SparsePoly

SCHEMA = "sparsefactor/1"

_VAR_RE = re.compile(r"x(\d+)")
_PRODUCT_RE = re.compile(r"\s*\([^()]*\)(?:\s*\*\s*\([^()]*\))*\s*$")


# ---------------------------------------------------------------------------
# polynomial grammar
#
#   poly  := term (('+'|'-') term)*
#   term  := coeff? ('*'? var ('^' int)?)*
#   var   := 'x' int
#
# Whitespace is insignificant.  Coefficients are decimal residues; there is
# no unary minus and there are no parentheses at this level.


def _tokenize(text: str) -> list[tuple[str, Optional[int], int]]:
    toks: list[tuple[str, Optional[int], int]] = []
    i, L = 0, len(text)
    while i < L:
        ch = text[i]
        if ch in " \t\r\n":
            i += 1
            continue
        pos = i + 1  # 1-based column
        if ch in "+-*^":
            toks.append((ch, None, pos))
            i += 1
        elif ch.isdigit():
            j = i
            while j < L and text[j].isdigit():
                j += 1
            toks.append(("int", int(text[i:j]), pos))
            i = j
        elif ch == "x":
            j = i + 1
            while j < L and text[j].isdigit():
                j += 1
            if j == i + 1:
                raise PolySyntaxError("expected a variable index after 'x'", i + 2)
            toks.append(("var", int(text[i + 1:j]), pos))
            i = j
        else:
            raise PolySyntaxError(f"unexpected character {ch!r}", pos)
    toks.append(("end", None, L + 1))
    return toks


def parse_poly(text: str, n: int, field: FieldDesc) -> SparsePoly:
    """Parse the strict sum-of-terms grammar into a canonical polynomial.

    Like terms are combined in the field, so "x1 - x1" parses to zero.
    Errors carry the 1-based column of the offending character.
    """
    toks = _tokenize(text)
    pos = 0

    def term(negated: bool) -> tuple[tuple, int]:
        nonlocal pos
        kind, val, _ = toks[pos]
        coeff: Optional[int] = None
        if kind == "int":
            coeff = val
            pos += 1
        exps = [0] * n
        saw_var = False
        while True:
            kind, val, at = toks[pos]
            if kind == "*":
                pos += 1
                kind, val, at = toks[pos]
                if kind != "var":
                    raise PolySyntaxError("expected a variable after '*'", at)
            if kind != "var":
                break
            pos += 1
            if val < 1 or val > n:
                raise UnknownVariable(f"x{val} is outside x1..x{n}")
            e = 1
            kind2, _, _ = toks[pos]
            if kind2 == "^":
                pos += 1
                kind3, val3, at3 = toks[pos]
                if kind3 != "int":
                    raise PolySyntaxError("expected an integer exponent after '^'", at3)
                pos += 1
                e = val3
            exps[val - 1] += e
            saw_var = True
        if coeff is None and not saw_var:
            raise PolySyntaxError("expected a term", toks[pos][2])
        if coeff is not None and coeff >= field.size:
            raise CoeffOutOfRange(
                f"coefficient {coeff} is not a residue in a field of size {field.size}")
        c = 1 if coeff is None else coeff
        if negated:
            c = field.neg(c)
        return tuple(exps), c

    acc: dict[tuple, int] = {}
    e0, c0 = term(False)
    acc[e0] = c0
    while True:
        kind, _, at = toks[pos]
        if kind == "end":
            break
        if kind not in ("+", "-"):
            raise PolySyntaxError("expected '+' or '-'", at)
        pos += 1
        e1, c1 = term(kind == "-")
        acc[e1] = field.add(acc.get(e1, 0), c1)
    return SparsePoly.make(field, n, list(acc.items()))


# ---------------------------------------------------------------------------
# input plumbing


def _is_product_text(text: str) -> bool:
    return bool(_PRODUCT_RE.match(text))


def _product_factors(text: str) -> list[str]:
    return re.findall(r"\(([^()]*)\)", text)


def _max_var_index(texts: Sequence[str]) -> int:
    idx = 1
    for t in texts:
        for m in _VAR_RE.finditer(t):
            idx = max(idx, int(m.group(1)))
    return idx


def _usage(msg: str) -> SystemExit:
    print(f"error: {msg}", file=sys.stderr)
    return SystemExit(2)


def _load_manifest(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict) or "product" not in data:
        raise _usage(f"manifest {path} lacks a \"product\" list")
    return data


class _Input:
    """One parsed command input: an explicit polynomial or a product box."""

    def __init__(self, poly: Optional[SparsePoly], box: Optional[BlackBox],
                 ell: int):
        self.poly = poly
        self.box = box
        self.ell = ell

    @property
    def value(self):
        return self.poly if self.poly is not None else self.box


def _gather_texts(args, positional: list[str]) -> list[str]:
    texts = list(positional)
    if getattr(args, "manifest", None):
        texts.extend(_load_manifest(args.manifest)["product"])
    out = []
    for t in texts:
        out.extend(_product_factors(t) if _is_product_text(t) else [t])
    return out


def _resolve_n(args, texts: Sequence[str]) -> int:
    return args.n if args.n is not None else _max_var_index(texts)


def _resolve_sd(args, manifest: Optional[dict]) -> tuple[int, int]:
    s = args.s if args.s is not None else (manifest or {}).get("s")
    d = args.d if args.d is not None else (manifest or {}).get("d")
    if s is None or d is None:
        raise _usage("--s and --d are required (directly or via the manifest)")
    return int(s), int(d)


def _build_input(args, text: Optional[str], n: int, field: FieldDesc,
                 s: int, d: int) -> _Input:
    if getattr(args, "manifest", None):
        mani = _load_manifest(args.manifest)
        children = [BlackBox.explicit(parse_poly(t, n, field), d=d, s=s)
                    for t in mani["product"]]
        return _Input(None, BlackBox.product(children, d=d, s=s), len(children))
    if text is None:
        raise _usage("an input polynomial (or --manifest) is required")
    if _is_product_text(text):
        children = [BlackBox.explicit(parse_poly(t, n, field), d=d, s=s)
                    for t in _product_factors(text)]
        return _Input(None, BlackBox.product(children, d=d, s=s), len(children))
    return _Input(parse_poly(text, n, field), None, 1)


def _params(args, n: int, s: int, d: int, ell: int) -> AlgoParams:
    return AlgoParams(n=n, s=s, d=d, ell=ell,
                      m_override=args.m_override,
                      escalate=args.escalate,
                      budget_exponent_constant=args.S_exponent)


def _emit(obj: dict) -> None:
    obj["schema"] = SCHEMA
    print(json.dumps(obj, sort_keys=True))


def _maybe_task_m(args, n: Optional[int]) -> bool:
    # --task-m prints the rigorous parameter-table entry and skips the run
    if not getattr(args, "task_m", None):
        return False
    if n is None:
        if args.n is None:
            raise _usage("--task-m needs --n")
        n = args.n
    if args.s is None or args.d is None:
        raise _usage("--task-m needs --s and --d")
    field = build_extension(args.p, args.k) if args.p else None
    m = m_for(args.task_m, n, args.s, args.d,
              k=args.e or 1, ell=args.ell or 1, D=args.D, field=field)
    _emit({"command": "task_m", "task": args.task_m, "m": m})
    return True


# ---------------------------------------------------------------------------
# subcommands


def _cmd_factor(args) -> int:
    texts = _gather_texts(args, [args.poly] if args.poly else [])
    n = _resolve_n(args, texts)
    if _maybe_task_m(args, n):
        return 0
    field = build_extension(args.p, args.k)
    mani = _load_manifest(args.manifest) if args.manifest else None
    s, d = _resolve_sd(args, mani)
    inp = _build_input(args, args.poly, n, field, s, d)
    params = _params(args, n, s, d, args.ell or inp.ell)
    if inp.poly is not None:
        fz = algos.factor_nsd(inp.poly, params)
    else:
        fz = algos.factor_product_general(inp.box, params)
    _emit({"command": "factor", "unit": fz.unit,
           "factors": [[g.to_text(), m] for g, m in fz.factors]})
    return 0


def _cmd_divisors(args) -> int:
    texts = _gather_texts(args, [args.poly] if args.poly else [])
    n = _resolve_n(args, texts)
    if _maybe_task_m(args, n):
        return 0
    field = build_extension(args.p, args.k)
    mani = _load_manifest(args.manifest) if args.manifest else None
    s, d = _resolve_sd(args, mani)
    inp = _build_input(args, args.poly, n, field, s, d)
    params = _params(args, n, s, d, args.ell or inp.ell)
    if inp.poly is not None:
        ds = algos.sparse_divisors(inp.poly, params)
    else:
        ds = algos.divisors_of_product(inp.box, params)
    _emit({"command": "divisors", "monomial": ds.monomial.to_text(),
           "count": len(ds.divisors),
           "divisors": [g.to_text() for g in ds.divisors]})
    return 0


def _cmd_divides(args) -> int:
    texts = _gather_texts(args, [args.divisor, args.poly])
    n = _resolve_n(args, texts)
    if _maybe_task_m(args, n):
        return 0
    field = build_extension(args.p, args.k)
    s, d = _resolve_sd(args, None)

    def one(text: str):
        if _is_product_text(text):
            kids = [BlackBox.explicit(parse_poly(t, n, field), d=d, s=s)
                    for t in _product_factors(text)]
            return BlackBox.product(kids, d=d, s=s)
        return parse_poly(text, n, field)

    params = _params(args, n, s, d, args.ell or 1)
    ok = algos.divides(one(args.divisor), one(args.poly), params)
    _emit({"command": "divides", "divides": ok})
    return 0


def _cmd_power(args) -> int:
    if args.e is None or args.e < 1:
        raise _usage("power needs --e >= 1")
    texts = _gather_texts(args, [args.poly] if args.poly else [])
    n = _resolve_n(args, texts)
    if _maybe_task_m(args, n):
        return 0
    field = build_extension(args.p, args.k)
    mani = _load_manifest(args.manifest) if args.manifest else None
    s, d = _resolve_sd(args, mani)
    inp = _build_input(args, args.poly, n, field, s, d)
    params = _params(args, n, s, d, args.ell or inp.ell)
    ok = algos.is_complete_power(inp.value, args.e, params)
    _emit({"command": "power", "e": args.e, "is_power": ok})
    return 0


def _cmd_multiquad(args) -> int:
    texts = _gather_texts(args, [args.poly] if args.poly else [])
    n = _resolve_n(args, texts)
    if _maybe_task_m(args, n):
        return 0
    field = build_extension(args.p, args.k)
    mani = _load_manifest(args.manifest) if args.manifest else None
    s, d = _resolve_sd(args, mani)
    inp = _build_input(args, args.poly, n, field, s, d)
    params = _params(args, n, s, d, args.ell or inp.ell)
    mq = algos.multiquadratic_factors(inp.value, params)
    _emit({"command": "multiquad",
           "factors": [[g.to_text(), m] for g, m in mq]})
    return 0


def _cmd_multiplicity(args) -> int:
    texts = _gather_texts(args, [args.factor, args.poly])
    n = _resolve_n(args, texts)
    if _maybe_task_m(args, n):
        return 0
    field = build_extension(args.p, args.k)
    s, d = _resolve_sd(args, None)
    phi = parse_poly(args.factor, n, field)
    inp = _build_input(args, args.poly, n, field, s, d)
    params = _params(args, n, s, d, args.ell or inp.ell)
    k = algos.multiplicity_of(phi, inp.value, params)
    _emit({"command": "multiplicity", "multiplicity": k})
    return 0


def _cmd_interp(args) -> int:
    pool_texts = args.factor or []
    if not pool_texts:
        raise _usage("interp needs at least one --factor candidate")
    texts = _gather_texts(args, [args.q, args.poly] + list(pool_texts))
    n = _resolve_n(args, texts)
    if _maybe_task_m(args, n):
        return 0
    field = build_extension(args.p, args.k)
    s, d = _resolve_sd(args, None)
    qpoly = parse_poly(args.q, n, field)
    fpoly = parse_poly(args.poly, n, field)
    pool = [parse_poly(t, n, field) for t in pool_texts]
    params = _params(args, n, s, d, args.ell or 1)
    a, b = algos.rational_interpolate(qpoly, fpoly, pool, params)
    _emit({"command": "interp", "numerator": a.to_text(),
           "denominator": b.to_text()})
    return 0


def _cmd_audit(args) -> int:
    texts = _gather_texts(args, [args.poly] if args.poly else [])
    n = _resolve_n(args, texts)
    if _maybe_task_m(args, n):
        return 0
    if args.poly is None or _is_product_text(args.poly) or args.manifest:
        raise _usage("audit takes one explicit polynomial")
    field = build_extension(args.p, args.k)
    s, d = _resolve_sd(args, None)
    f = parse_poly(args.poly, n, field)
    params = _params(args, n, s, d, args.ell or 1)
    res = algos.divisor_count_audit(f, params)
    _emit({"command": "audit", "count": res.count, "bound": res.bound,
           "vertices": res.vertices, "ok": res.ok})
    return 0


def _cmd_selftest(args) -> int:
    disagreements = 0
    for field, f, n, s, d in selftest_instances(args.count):
        params = AlgoParams(n=n, s=s, d=d)
        label = f"p={field.size} n={n} s={s} d={d} f={f.to_text()}"
        for oracle_name, algo_name, slow, fast in (
                ("brute_divisors", "sparse_divisors",
                 lambda: brute_divisors(f),
                 lambda: algos.sparse_divisors(f, params)),
                ("brute_factor", "factor_nsd",
                 lambda: brute_factor(f),
                 lambda: algos.factor_nsd(f, params))):
            t0 = time.perf_counter()
            want = slow()
            t1 = time.perf_counter()
            got = fast()
            t2 = time.perf_counter()
            if oracle_name == "brute_factor":
                agree = (want.unit == got.unit and want.factors == got.factors)
            else:
                agree = want == got
            disagreements += 0 if agree else 1
            timings = {"oracle_ms": 0, "algorithm_ms": 0} if args.repeatable \
                else {"oracle_ms": int((t1 - t0) * 1000),
                      "algorithm_ms": int((t2 - t1) * 1000)}
            rep = OracleReport(instance=label, oracle=oracle_name,
                               algorithm=algo_name, agree=agree,
                               timings=timings)
            print(json.dumps(rep.as_json(), sort_keys=True))
    _emit({"command": "selftest", "instances": args.count,
           "comparisons": 2 * args.count, "disagreements": disagreements})
    return 0 if disagreements == 0 else 1


def _bench_divisor_rows(repeatable: bool) -> list[tuple]:
    # split quadratics, one per variable: an s-term input with exactly
    # s^2 divisors, meeting the s^d candidate bound with equality
    F = build_extension(5, 1)
    rows = []
    for s in (2, 4, 8, 16):
        k = s.bit_length() - 1
        f = SparsePoly.const(F, 4, 1)
        for j in range(k):
            f = f * (SparsePoly.variable(F, 4, j, 2) + SparsePoly.const(F, 4, 4))
        params = AlgoParams(n=4, s=s, d=2)
        t0 = time.perf_counter()
        ds = algos.sparse_divisors(f, params)
        ms = 0 if repeatable else int((time.perf_counter() - t0) * 1000)
        m = m_for("DIVISOR_ENUM", 4, s, 2)
        rows.append(("divisors", 4, s, 2, 1, m, 0, ms, len(ds.divisors), s ** 2))
    return rows


def _bench_product_rows(repeatable: bool) -> list[tuple]:
    # two split-quadratic children, one behind an opaque evaluation-only
    # box so the run has to spend real queries recovering it
    F = build_extension(101, 1)
    rows = []
    for s in (2, 4, 8, 16):
        e1 = SparsePoly.variable(F, 2, 0, 2) + SparsePoly.const(F, 2, F.size - 1)
        e2 = SparsePoly.variable(F, 2, 1, 2) + SparsePoly.const(F, 2, F.size - 4)
        base = BlackBox.explicit(e1, d=2, s=s)
        c1 = BlackBox.derived(base, 2,
                              fn=lambda pt, _b=base: query(_b, tuple(pt)),
                              total_deg_bound=2)
        c2 = BlackBox.explicit(e2, d=2, s=s)
        box = BlackBox.product([c1, c2], d=2, s=s)
        params = AlgoParams(n=2, s=s, d=2, ell=2)
        t0 = time.perf_counter()
        ds = algos.divisors_of_product(box, params)
        ms = 0 if repeatable else int((time.perf_counter() - t0) * 1000)
        queries = c1.query_count + c2.query_count
        m = m_for("DIVISOR_ENUM", 2, s, 2)
        rows.append(("product_divisors", 2, s, 2, 2, m, queries, ms,
                     len(ds.divisors), s ** 6))
    return rows


def _cmd_bench(args) -> int:
    rows = _bench_divisor_rows(args.repeatable)
    rows += _bench_product_rows(args.repeatable)
    print("task,n,s,d,ell,m,queries,millis,candidates,bound")
    for r in rows:
        print(",".join(str(x) for x in r))
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--p", type=int, help="field characteristic (prime)")
    sp.add_argument("--k", type=int, default=1, help="extension degree")
    sp.add_argument("--n", type=int, default=None,
                    help="number of variables (default: highest index used)")
    sp.add_argument("--d", type=int, default=None,
                    help="declared individual degree bound")
    sp.add_argument("--s", type=int, default=None,
                    help="declared sparsity bound")
    sp.add_argument("--ell", type=int, default=None,
                    help="declared factor count for products")
    sp.add_argument("--e", type=int, default=None,
                    help="power / multiplicity index where applicable")
    sp.add_argument("--D", type=int, default=1,
                    help="quotient count for multi-quotient parameter rows")
    sp.add_argument("--m-override", dest="m_override", type=int, default=None,
                    help="pin the working generator size m")
    sp.add_argument("--S-exponent", dest="S_exponent", type=float, default=1.0,
                    help="constant in the divisor-sparsity budget exponent")
    sp.add_argument("--escalate", action=argparse.BooleanOptionalAction,
                    default=True, help="escalation-ladder mode (on by default)")
    sp.add_argument("--task-m", dest="task_m", choices=list(TASKS),
                    default=None, help="print the rigorous m table entry and exit")
    sp.add_argument("--repeatable", action="store_true",
                    help="zero all timing fields for byte-identical reruns")
    sp.add_argument("--manifest", default=None,
                    help="JSON product manifest file")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="sparsefactor",
        description="sparse polynomial factorization toolkit over small fields")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name: str, fn, help_: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help_)
        _add_common(sp)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("factor", _cmd_factor, "complete factorization")
    sp.add_argument("poly", nargs="?", default=None)
    sp = add("divisors", _cmd_divisors, "enumerate sparse divisors")
    sp.add_argument("poly", nargs="?", default=None)
    sp = add("divides", _cmd_divides, "exact divisibility test")
    sp.add_argument("divisor")
    sp.add_argument("poly")
    sp = add("power", _cmd_power, "complete e-th power test")
    sp.add_argument("poly", nargs="?", default=None)
    sp = add("multiquad", _cmd_multiquad, "factor a multiquadratic input")
    sp.add_argument("poly", nargs="?", default=None)
    sp = add("multiplicity", _cmd_multiplicity,
             "multiplicity of an irreducible factor")
    sp.add_argument("factor")
    sp.add_argument("poly")
    sp = add("interp", _cmd_interp, "rational function reconstruction")
    sp.add_argument("q")
    sp.add_argument("poly")
    sp.add_argument("--factor", action="append", default=None,
                    help="candidate denominator factor (repeatable)")
    sp = add("audit", _cmd_audit, "divisor count vs Newton polytope bound")
    sp.add_argument("poly", nargs="?", default=None)
    sp = add("selftest", _cmd_selftest, "differential test against the oracle")
    sp.add_argument("--count", type=int, default=40)
    add("bench", _cmd_bench, "scaling benchmark, CSV on stdout")
    return ap


def run(cmd: Sequence[str]) -> int:
    """Execute one CLI invocation; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(list(cmd))
    except SystemExit as e:
        return int(e.code or 0)
    try:
        needs_field = args.command not in ("selftest", "bench")
        if needs_field and not getattr(args, "task_m", None) and not args.p:
            raise _usage("--p is required")
        return args.fn(args)
    except SystemExit as e:
        return int(e.code or 0)
    except ToolkitError as e:
        print(json.dumps({"error_kind": e.kind, "message": str(e),
                          "schema": SCHEMA}, sort_keys=True))
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
