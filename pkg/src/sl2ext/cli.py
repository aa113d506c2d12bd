"""Command-line front end.

Weights given on the command line are module weights (the 2d of Delta(2d)).
Exit codes: 0 ok, 2 usage, 3 overflow, 4 verification failure, 5 capacity.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from collections import Counter
from importlib import resources
from typing import Any

import numpy as np

from . import core, growth, labels, partitions, series
from .core import DimCache, CacheFormatError
from .errors import ArithmeticOverflowError, CapacityError, UnsupportedWeightError

EXIT_OK, EXIT_USAGE, EXIT_OVERFLOW, EXIT_VERIFY, EXIT_CAPACITY = 0, 2, 3, 4, 5
CACHE_ENV = "SL2EXT_CACHE"
# full polynomials are only materialised (and cached) below this z-degree bound
POLY_DEGREE_LIMIT = 1024
DEFAULT_LIMIT = 1_000_000


class UsageError(Exception):
    pass


class Output:
    """One command's result in all three formats."""

    def __init__(self, payload: dict, plain: list[str], header: list[str], rows: list[list[Any]],
                 exit_code: int = 0, force_save: bool = False):
        self.payload = payload
        self.plain = plain
        self.header = header
        self.rows = rows
        self.exit_code = exit_code
        self.force_save = force_save

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return json.dumps(self.payload, indent=2, sort_keys=True) + "\n"
        if fmt == "csv":
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(self.header)
            w.writerows(self.rows)
            return buf.getvalue()
        return "\n".join(self.plain) + "\n"


def load_schema(command: str) -> dict:
    text = resources.files("sl2ext").joinpath("schemas", f"{command}.json").read_text()
    return json.loads(text)


def _prime(value: str) -> int:
    try:
        return core.require_prime(int(value))
    except (TypeError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _nonneg(value: str) -> int:
    try:
        v = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {value!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0: {v}")
    return v


def _positive(value: str) -> int:
    v = _nonneg(value)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {v}")
    return v


# commands


def cmd_dim(args: argparse.Namespace, cache: DimCache) -> Output:
    p = args.prime
    if args.lam is not None or args.mu is not None:
        if args.lam is None or args.mu is None:
            raise UsageError("--lambda and --mu must be given together")
        dim = core.ext_dim_general(p, args.lam, args.mu, args.n, cache)
        payload = {"command": "dim", "prime": p, "n": args.n, "lambda": args.lam,
                   "mu": args.mu, "dimension": dim}
        return Output(payload, [str(dim)], ["lambda", "mu", "n", "dimension"],
                      [[args.lam, args.mu, args.n, dim]])
    if args.weight is None:
        raise UsageError("give --weight, or --lambda and --mu")
    w = args.weight
    payload = {"command": "dim", "prime": p, "n": args.n, "weight": w}
    plain = []
    if w % 2:
        dim, poly = 0, core.ExtPoly()
    else:
        d = w // 2
        if 2 * d // p <= POLY_DEGREE_LIMIT:
            poly = core.ve(p, d, cache)
            dim = poly[args.n]
        else:
            poly = None
            dim = core.ext_dim(p, args.n, d, cache)
    if args.poly:
        if poly is None:
            raise UsageError(f"--poly needs weight with degree bound <= {POLY_DEGREE_LIMIT}")
        payload["polynomial"] = list(poly.coeffs)
        plain.append(f"ve({w}) = {poly}")
    payload["dimension"] = dim
    plain.insert(0, str(dim))
    return Output(payload, plain, ["n", "d", "weight", "dimension"], [[args.n, w // 2, w, dim]])


def _table_values(p: int, max_n: int, d_max: int, method: str, cache: DimCache) -> np.ndarray:
    out = np.zeros((max_n + 1, d_max + 1), dtype=object)
    if method == "recursion":
        for n in range(max_n + 1):
            out[n] = [int(x) for x in core.ext_dim_column(p, n, d_max, cache)]
    elif method == "partitions":
        if p != 2:
            raise UsageError("--method partitions needs --prime 2")
        T = partitions.pow2_partition_table(max_n + 1, d_max + 1)
        for n in range(max_n + 1):
            out[n] = T[n + 1, 1:]
    elif method == "labels":
        if p == 2:
            raise UsageError("--method labels needs an odd prime")
        for n in range(max_n + 1):
            out[n] = labels.ext_dims_via_labels(p, n, d_max)
    elif method == "series":
        G = series.solve_G(p, max(d_max, 1), max(max_n, 1))
        out[:] = G.table[: d_max + 1, : max_n + 1].T
    else:
        raise UsageError(f"unknown method {method}")
    return out


def cmd_table(args: argparse.Namespace, cache: DimCache) -> Output:
    p, max_n, d_max = args.prime, args.max_n, args.max_weight // 2
    if (max_n + 1) * (d_max + 1) > args.limit:
        raise CapacityError(f"table has {(max_n + 1) * (d_max + 1)} cells, limit {args.limit}")
    vals = _table_values(p, max_n, d_max, args.method, cache)
    rows = [[n, d, 2 * d, int(vals[n, d])] for n in range(max_n + 1) for d in range(d_max + 1)]
    payload = {
        "command": "table", "prime": p, "method": args.method, "max_n": max_n,
        "max_weight": args.max_weight,
        "rows": [{"n": n, "d": d, "weight": w, "dimension": v} for n, d, w, v in rows],
    }
    width = max(len(str(r[3])) for r in rows)
    plain = [f"p={p} method={args.method}; row n, columns weight 0, 2, ..., {2 * d_max}"]
    for n in range(max_n + 1):
        plain.append(f"n={n:<3}" + " ".join(f"{int(vals[n, d]):>{width}}" for d in range(d_max + 1)))
    return Output(payload, plain, ["n", "d", "weight", "dimension"], rows)


def cmd_scan(args: argparse.Namespace, cache: DimCache) -> Output:
    p, n, d_max = args.prime, args.n, args.max_weight // 2
    best, where = core.max_ext_scan(p, n, d_max, cache)
    rep = growth.boundedness_scan(p, n, d_max, cache)
    weights = [2 * d for d in where]
    last = rep.meta["last_improvement"]
    verdict = (
        f"running max {rep.meta['running_max']}; no improvement after weight {2 * last} "
        f"(scanned to weight {args.max_weight})"
        if last is not None else f"all dimensions zero up to weight {args.max_weight}"
    )
    payload = {
        "command": "scan", "prime": p, "n": n, "max_weight": args.max_weight,
        "maximum": best, "argmax_weights": weights,
        "improvements": [{"weight": 2 * r.index, "dimension": int(r.measured)} for r in rep.rows],
        "verdict": verdict,
    }
    plain = [
        f"max dim Ext^{n}(Delta(0), Delta(w)) for w <= {args.max_weight}, p={p}: {best}",
        "attained at weights: " + ", ".join(map(str, weights)),
        "running max: " + ", ".join(f"{int(r.measured)} @ w={2 * r.index}" for r in rep.rows),
        verdict,
    ]
    return Output(payload, plain, ["n", "weight", "dimension"], [[n, w, best] for w in weights])


def cmd_labels(args: argparse.Namespace, cache: DimCache) -> Output:
    labs = labels.build_labels(args.n)
    if len(labs) > args.limit:
        raise CapacityError(f"{len(labs)} labels exceed limit {args.limit}")
    target = None
    if args.weight is not None:
        if args.prime is None or args.prime == 2:
            raise UsageError("--weight with labels needs an odd --prime")
        if args.weight % 2:
            raise UsageError("weight must be even")
        target = args.weight // 2 + 1
    items = []
    for i, L in enumerate(labs):
        item = {"index": i, "label": str(L), "length": len(L), "offsets": list(L.offsets),
                "parameters": list(L.names)}
        if target is not None:
            item["solutions"] = labels.label_solutions(L, args.prime, target)
        items.append(item)
    payload = {"command": "labels", "n": args.n, "count": len(labs), "labels": items,
               "length_spectrum": {str(k): v for k, v in sorted(labels.length_spectrum(args.n).items())}}
    plain = []
    for it in items:
        line = it["label"]
        if target is not None:
            line += f"  solutions={it['solutions']}"
        plain.append(line)
    header = ["index", "label", "length", "offsets"]
    rows = [[it["index"], it["label"], it["length"], " ".join(map(str, it["offsets"]))] for it in items]
    if target is not None:
        payload.update(prime=args.prime, weight=args.weight,
                       dimension=sum(it["solutions"] for it in items))
        plain.append(f"dim Ext^{args.n}(Delta(0), Delta({args.weight})) = {payload['dimension']}")
        header.append("solutions")
        for r, it in zip(rows, items):
            r.append(it["solutions"])
    return Output(payload, plain, header, rows)


def cmd_growth(args: argparse.Namespace, cache: DimCache) -> Output:
    want_all = not (args.fibonacci or args.binomial or args.constant)
    reports = []
    if args.fibonacci or want_all:
        reports.append(growth.fibonacci_check(args.max_n))
    if args.binomial or want_all:
        reports.append(growth.binomial_report(args.max_n))
    payload: dict[str, Any] = {"command": "growth", "reports": [r.to_dict() for r in reports]}
    plain = []
    rows = []
    for r in reports:
        plain.append(f"[{r.title}] {'PASS' if r.passed else 'FAIL'}: {r.verdict}")
        for row in r.rows:
            plain.append(f"  {row.index:>4} measured={row.measured} predicted={row.predicted}")
            rows.append([r.title, row.index, row.measured, row.predicted, row.ratio])
    if args.constant or want_all:
        closed = growth.growth_constant_closed_form()
        fitted = growth.growth_constant_estimate(args.fit_lo, args.fit_hi)
        payload["constant"] = {"closed_form": closed, "fitted": fitted, "golden_ratio": growth.GOLDEN,
                               "fit_window": [args.fit_lo, args.fit_hi]}
        plain.append(f"[growth constant] closed form {closed:.9f}, fitted over "
                     f"[{args.fit_lo}, {args.fit_hi}] {fitted:.6f}, golden ratio {growth.GOLDEN:.9f}")
        rows.append(["growth constant closed form", "", closed, growth.GOLDEN, closed / growth.GOLDEN])
        rows.append(["growth constant fitted", "", fitted, growth.GOLDEN, fitted / growth.GOLDEN])
    payload["passed"] = all(r.passed for r in reports)
    return Output(payload, plain, ["report", "index", "measured", "predicted", "ratio"], rows)


def cmd_witness(args: argparse.Namespace, cache: DimCache) -> Output:
    w = labels.witness_weight(args.n, args.length, args.prime)
    dim = labels.ext_dim_via_labels(args.prime, args.n, w.d)
    weight = 2 * w.d
    payload = {
        "command": "witness", "prime": args.prime, "n": args.n, "length": args.length,
        "exponents": list(w.exponents), "weight": weight, "bound": w.bound, "dimension": dim,
        "certified": dim >= w.bound,
    }
    plain = [
        f"exponents b = {w.exponents}, m = {w.weight_sum}",
        f"dim Ext^{args.n}(Delta(0), Delta({weight})) = {dim} >= {w.bound}",
    ]
    return Output(payload, plain, ["n", "length", "weight", "bound", "dimension"],
                  [[args.n, args.length, weight, w.bound, dim]])


def _cache_check(path: str | None) -> series.CheckReport | None:
    if path is None or not os.path.exists(path):
        return None
    try:
        records = list(core.read_cache_records(path))
    except CacheFormatError as exc:
        return series.CheckReport("cache entries", False, (0, 0), [], None, str(exc))
    bad = []
    details = []
    for p, d, stored, fresh in core.recompute_entries(records):
        if stored != fresh:
            m = next(i for i in range(max(len(stored.coeffs), len(fresh.coeffs))) if stored[i] != fresh[i])
            bad.append((d, m, stored[m] - fresh[m]))
            details.append(f"p={p} d={d} z^{m}: stored {stored[m]}, recomputed {fresh[m]}")
    return series.CheckReport("cache entries", not bad, (0, 0), bad[: series.MAX_OFFENDERS], None,
                              "; ".join(details[:5]) or f"{len(records)} entries reproduced")


def run_verification(p: int, ds: int, dz: int, cache_path: str | None = None) -> list[series.CheckReport]:
    fresh = DimCache()
    G = series.build_G(p, ds, dz, fresh)
    checks = [series.check_functional_eq(p, G)]
    if p == 2:
        checks.append(series.check_p2_unified_form(G))
        checks.append(series.check_gn_recursion(G))
        checks.append(series.check_rational_identity(G, ds.bit_length()))
    else:
        checks.append(series.check_h_closed_forms(p, G))

    solved = series.solve_G(p, ds, dz)
    diff = solved - G
    checks.append(series._report("series solved from functional equation", diff, ds, dz))

    cross = series.TruncSeries.zeros(ds, dz).table.copy()
    if p == 2:
        T = partitions.pow2_partition_table(dz + 1, ds + 1)
        name = "partition count vs recursion"
    else:
        name = "label count vs recursion"
    for n in range(dz + 1):
        col = T[n + 1, 1:] if p == 2 else labels.ext_dims_via_labels(p, n, ds)
        cross[:, n] = [int(a) - b for a, b in zip(col, G.z_slice(n))]
    checks.append(series._report(name, series.TruncSeries(cross), ds, dz))

    hom = [core.hom_dim_closed(p, d) - G.coefficient(d, 0) for d in range(ds + 1)]
    hom_t = series.TruncSeries.zeros(ds, dz).table.copy()
    hom_t[:, 0] = hom
    checks.append(series._report("Hom closed form", series.TruncSeries(hom_t), ds, 0))

    cache_report = _cache_check(cache_path)
    if cache_report is not None:
        checks.append(cache_report)
    return checks


def cmd_verify(args: argparse.Namespace, cache: DimCache) -> Output:
    checks = run_verification(args.prime, args.ds, args.dz, args.cache_path)
    ok = all(c.passed for c in checks)
    payload = {"command": "verify", "prime": args.prime, "ds": args.ds, "dz": args.dz,
               "passed": ok, "checks": [c.to_dict() for c in checks]}
    plain = []
    rows = []
    for c in checks:
        line = f"{'PASS' if c.passed else 'FAIL'} {c.name}"
        if not c.passed:
            if c.offenders:
                d, m, v = c.offenders[0]
                line += f": residual {v} at s^{d} z^{m}"
            if c.detail:
                line += f" ({c.detail})"
        plain.append(line)
        rows.append([c.name, "PASS" if c.passed else "FAIL",
                     ";".join(f"{d}:{m}:{v}" for d, m, v in c.offenders), c.detail])
    return Output(payload, plain, ["check", "status", "offenders", "detail"], rows,
                  exit_code=EXIT_OK if ok else EXIT_VERIFY)


def cmd_cache(args: argparse.Namespace, cache: DimCache) -> Output:
    if args.cache_path is None:
        raise UsageError(f"cache command needs --cache or ${CACHE_ENV}")
    if args.action == "clear":
        cache.clear()
    elif args.action == "fill":
        if args.prime is None or args.max_weight is None:
            raise UsageError("cache fill needs --prime and --max-weight")
        if args.max_weight // args.prime > POLY_DEGREE_LIMIT:
            raise CapacityError(f"degree bound exceeds {POLY_DEGREE_LIMIT}")
        for d in range(args.max_weight // 2 + 1):
            core.ve(args.prime, d, cache)
    per_prime = Counter(p for p, _, _ in cache.entries())
    payload = {"command": "cache", "action": args.action, "path": str(args.cache_path),
               "entries": len(cache), "per_prime": {str(p): c for p, c in sorted(per_prime.items())}}
    plain = [f"{args.cache_path}: {len(cache)} entries"]
    plain += [f"  p={p}: {c}" for p, c in sorted(per_prime.items())]
    return Output(payload, plain, ["prime", "entries"], [[p, c] for p, c in sorted(per_prime.items())],
                  force_save=True)


# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["plain", "csv", "json"], default="plain")
    common.add_argument("--cache", dest="cache_file", metavar="PATH",
                        help=f"JSON-lines cache file (default ${CACHE_ENV})")
    common.add_argument("--no-cache", action="store_true", help="ignore any cache file")
    common.add_argument("--limit", type=_positive, default=DEFAULT_LIMIT,
                        help="capacity limit for enumerations and tables")

    parser = argparse.ArgumentParser(
        prog="sl2ext",
        description="Dimensions of Ext^n(Delta(0), Delta(w)) for SL2 in characteristic p.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.RawDescriptionHelpFormatter

    p = sub.add_parser("dim", parents=[common], formatter_class=fmt,
                       help="one Ext dimension",
                       epilog="CSV columns: n,d,weight,dimension (or lambda,mu,n,dimension)")
    p.add_argument("--prime", type=_prime, required=True)
    p.add_argument("--n", type=_nonneg, required=True, help="cohomological degree")
    p.add_argument("--weight", type=_nonneg, help="module weight w of Delta(w)")
    p.add_argument("--lambda", dest="lam", type=_nonneg, help="weight of the first Weyl module")
    p.add_argument("--mu", type=_nonneg, help="weight of the second Weyl module")
    p.add_argument("--poly", action="store_true", help="also print the full Ext polynomial in z")
    p.set_defaults(func=cmd_dim)

    p = sub.add_parser("table", parents=[common], formatter_class=fmt,
                       help="dimension table over n and weight",
                       epilog="CSV columns: n,d,weight,dimension (weight = 2d)")
    p.add_argument("--prime", type=_prime, required=True)
    p.add_argument("--max-n", type=_nonneg, required=True)
    p.add_argument("--max-weight", type=_nonneg, required=True)
    p.add_argument("--method", choices=["recursion", "partitions", "labels", "series"],
                   default="recursion")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("scan", parents=[common], formatter_class=fmt,
                       help="maximum dimension over weights and running-maximum report",
                       epilog="CSV columns: n,weight,dimension (one row per maximising weight)")
    p.add_argument("--prime", type=_prime, required=True)
    p.add_argument("--n", type=_nonneg, required=True)
    p.add_argument("--max-weight", type=_nonneg, required=True)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("labels", parents=[common], formatter_class=fmt,
                       help="labels of s*h_n(s) for odd p",
                       epilog="CSV columns: index,label,length,offsets[,solutions]")
    p.add_argument("--n", type=_nonneg, required=True)
    p.add_argument("--prime", type=_prime)
    p.add_argument("--weight", type=_nonneg, help="count solutions per label at this weight")
    p.set_defaults(func=cmd_labels)

    p = sub.add_parser("growth", parents=[common], formatter_class=fmt,
                       help="Fibonacci, binomial argmax and growth-constant reports",
                       epilog="CSV columns: report,index,measured,predicted,ratio")
    p.add_argument("--fibonacci", action="store_true")
    p.add_argument("--binomial", action="store_true")
    p.add_argument("--constant", action="store_true")
    p.add_argument("--max-n", type=lambda v: max(2, _nonneg(v)), default=25)
    p.add_argument("--fit-lo", type=_nonneg, default=20)
    p.add_argument("--fit-hi", type=_nonneg, default=200)
    p.set_defaults(func=cmd_growth)

    p = sub.add_parser("witness", parents=[common], formatter_class=fmt,
                       help="weight with large Ext^n from labels of one length",
                       epilog="CSV columns: n,length,weight,bound,dimension")
    p.add_argument("--prime", type=_prime, required=True)
    p.add_argument("--n", type=_nonneg, required=True)
    p.add_argument("--length", type=_positive, required=True)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("verify", parents=[common], formatter_class=fmt,
                       help="check functional equations and cross-method agreement",
                       epilog="CSV columns: check,status,offenders,detail "
                              "(offenders as s_degree:z_degree:residual)")
    p.add_argument("--prime", type=_prime, required=True)
    p.add_argument("--ds", type=_positive, default=64, help="s-degree truncation")
    p.add_argument("--dz", type=_positive, default=16, help="z-degree truncation")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("cache", parents=[common], formatter_class=fmt,
                       help="inspect, clear or fill the cache file",
                       epilog="CSV columns: prime,entries")
    p.add_argument("action", choices=["show", "clear", "fill"])
    p.add_argument("--prime", type=_prime)
    p.add_argument("--max-weight", type=_nonneg)
    p.set_defaults(func=cmd_cache)
    return parser


def _error(msg: str, code: int) -> int:
    print(f"sl2ext: error: {msg}", file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    path = None if args.no_cache else (args.cache_file or os.environ.get(CACHE_ENV))
    args.cache_path = path
    try:
        if path is not None and args.command not in ("verify", "cache"):
            cache = DimCache(path)
        elif path is not None and args.command == "cache":
            cache = DimCache(path) if args.action != "clear" else DimCache()
        else:
            cache = DimCache()
        out: Output = args.func(args, cache)
        sys.stdout.write(out.render(args.format))
        if path is not None and args.command != "verify" and (cache.dirty or out.force_save):
            cache.save(path)
        return out.exit_code
    except ArithmeticOverflowError as exc:
        return _error(f"overflow: {exc}", EXIT_OVERFLOW)
    except CapacityError as exc:
        return _error(f"capacity: {exc}", EXIT_CAPACITY)
    except (UsageError, UnsupportedWeightError, CacheFormatError, ValueError) as exc:
        return _error(str(exc), EXIT_USAGE)


if __name__ == "__main__":
    sys.exit(main())
