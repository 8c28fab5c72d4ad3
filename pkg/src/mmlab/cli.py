"""Command-line front door: files and flags in, JSON/CSV artifacts out.

Exit codes: 0 success, 1 verification failure, 2 usage or input error.
Usage errors print help to standard error and write no output file.
"""

from __future__ import annotations

import argparse
import csv
import functools
import io
import sys
from fractions import Fraction
from pathlib import Path

from . import costs
from .bilinear import verify_computes
from .cw import (cw_border_decomp, cw_tensor, laser_hash_degenerate,
                 laser_zero_out, rank_terms_from_border, salem_spencer,
                 TypeDistribution, verify_border, weighted_tensor_sum)
from .engines import (MatrixPair, multiply_blocked, multiply_naive,
                      multiply_recursive, multiply_via_rect)
from .errors import MMLabError, SchemaError
from .fields import field_from_descriptor
from .groups import AbelianGroup, group_bilinear, group_tensor
from .kron_eval import kron_plan, static_cost
from .serialize import (algorithm_from_dict, algorithm_to_dict,
                        bitmatrix_from_dict, bitmatrix_from_text,
                        bitmatrix_to_dict, dense_from_csv, dense_to_csv,
                        dumps, field_of, loads, matrix_from_dict,
                        opcount_to_dict, show_number, tensor_from_dict,
                        tensor_to_dict)
from .sparse_f2 import sparse_factor
from .tensors import (MatMulShape, direct_sum, is_zero_out_of, kron_power,
                      matmul_tensor, tensor_equal)


def _write_text(path, text: str):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([show_number(v) for v in row])
    return buf.getvalue()


def _reports_csv(reports) -> str:
    header = list(reports[0].inputs) + ["value", "formula_id"]
    rows = [[rep.inputs[k] for k in reports[0].inputs] + [rep.value, rep.formula_id]
            for rep in reports]
    return _csv_text(header, rows)


def _ints(text: str) -> list:
    return [int(v) for v in text.split(",") if v.strip() != ""]


def _load_algorithm(path, field):
    doc = loads(Path(path).read_text())
    return algorithm_from_dict(doc, field)


def _load_dense(path: str, field):
    text = Path(path).read_text()
    if path.endswith(".json"):
        doc = loads(text)
        field_of(doc, path, field).check_same(field)
        m = matrix_from_dict(doc, field, path)
        return [[m.entry(r, c) for c in range(m.cols)] for r in range(m.rows)]
    return dense_from_csv(text, field)


# --- multiply ----------------------------------------------------------------


def _cmd_multiply(args) -> int:
    field = field_from_descriptor(args.field)
    pair = MatrixPair(_load_dense(args.lhs, field), _load_dense(args.rhs, field),
                      field)
    if args.engine == "naive":
        res = multiply_naive(pair)
    elif args.engine == "blocked":
        if not args.base:
            args.parser.error("--base n,m,d is required for engine blocked")
        res = multiply_blocked(pair, MatMulShape(*_ints(args.base)),
                               multiply_naive)
    else:
        if not args.alg:
            args.parser.error(f"--alg is required for engine {args.engine}")
        algo = _load_algorithm(args.alg, field)
        algo.field.check_same(field)
        run = multiply_recursive if args.engine == "recursive" else multiply_via_rect
        res = run(algo, pair, args.k, order=args.order)

    shown = [[field.show(v) for v in row] for row in res.product]
    count_doc = opcount_to_dict(res.count)
    trace_rows = []
    for name, stage, info, c in res.trace or []:
        dims = list(info) if isinstance(info, tuple) else ["", "", ""]
        blocks = "" if isinstance(info, tuple) else info
        trace_rows.append([name, stage, blocks, *dims, c.additions,
                           c.multiplications, c.elementwise_products])
    trace_header = ["map", "stage", "blocks", "rows", "cols", "width", "adds",
                    "mults", "prods"]
    if args.out:
        if args.format == "csv":
            _write_text(f"{args.out}.product.csv", dense_to_csv(res.product, field))
        else:
            _write_text(f"{args.out}.product.json",
                        dumps({"field": field.descriptor, "data": shown}))
        _write_text(f"{args.out}.count.json", dumps(count_doc))
        if args.trace:
            _write_text(f"{args.out}.trace.csv",
                        _csv_text(trace_header, trace_rows))
    else:
        doc = {"field": field.descriptor, "engine": args.engine,
               "product": shown, "count": count_doc}
        if args.trace:
            doc["trace"] = trace_rows
        _write_text(None, dumps(doc))
    return 0


# --- verify ------------------------------------------------------------------


def _cmd_verify(args) -> int:
    field = field_from_descriptor(args.field)
    algo = _load_algorithm(args.alg, field)
    if args.tensor:
        target = tensor_from_dict(loads(Path(args.tensor).read_text()),
                                  algo.field)
    elif algo.shape is not None:
        target = matmul_tensor(algo.shape, algo.field)
    else:
        args.parser.error("--tensor is required when the algorithm has no shape")
    ok = verify_computes(algo, target)
    _write_text(args.out, dumps({"verified": ok, "rank": algo.rank,
                                 "dims": list(algo.dims)}))
    return 0 if ok else 1


# --- kron --------------------------------------------------------------------


def _cmd_kron(args) -> int:
    field = field_from_descriptor(args.field)
    doc = loads(Path(args.matrix).read_text())
    field = field_of(doc, args.matrix, field)
    m = matrix_from_dict(doc, field, args.matrix)
    plan = kron_plan(m, args.k, order=args.order)
    rows = []
    for i, stage in enumerate(plan.stages, start=1):
        cost = static_cost(stage.core).scale(stage.block_count)
        rows.append([i, stage.left, stage.core.rows, stage.core.cols,
                     stage.right, stage.block_count, cost.additions,
                     cost.multiplications])
    total = plan.predicted()
    rows.append(["total", "", "", "", "", "", total.additions,
                 total.multiplications])
    _write_text(args.out, _csv_text(
        ["stage", "left", "rows", "cols", "right", "blocks", "adds", "mults"],
        rows))
    return 0


# --- cw ----------------------------------------------------------------------


def _cmd_cw_tensor(args) -> int:
    field = field_from_descriptor(args.field)
    _write_text(args.out, dumps(tensor_to_dict(cw_tensor(args.q, field))))
    return 0


def _cmd_cw_verify_border(args) -> int:
    field = field_from_descriptor(args.field)
    decomp = cw_border_decomp(args.q, field)
    ok = verify_border(decomp, cw_tensor(args.q, field))
    _write_text(args.out, dumps({"q": args.q, "terms": args.q + 2,
                                 "degree": decomp.degree_d, "verified": ok}))
    return 0 if ok else 1


def _cmd_cw_interp(args) -> int:
    field = field_from_descriptor(args.field)
    decomp = cw_border_decomp(args.q, field)
    weighted, points = rank_terms_from_border(decomp, args.k, field,
                                              mode=args.mode)
    used = weighted[0][1].field
    ok = tensor_equal(weighted_tensor_sum(weighted),
                      kron_power(cw_tensor(args.q, used), args.k))
    _write_text(args.out, dumps({
        "q": args.q, "k": args.k, "mode": args.mode, "points": points,
        "field": used.descriptor, "rank_per_term": (args.q + 2) ** args.k,
        "verified": ok}))
    return 0 if ok else 1


def _laser_verified(out, zeroed, big) -> bool:
    # Zero surviving blocks is a valid (empty) degeneration.
    if not out.blocks:
        return True
    seen = (set(), set(), set())
    for blk in out.blocks:
        axes = (blk.x_vars, blk.y_vars, blk.z_vars)
        if any(seen[i] & set(axes[i]) for i in range(3)):
            return False
        for i in range(3):
            seen[i].update(axes[i])
        if not is_zero_out_of(matmul_tensor(blk.shape, zeroed.field), zeroed,
                              axes, ordered=True):
            return False
    dsum = functools.reduce(
        direct_sum, [matmul_tensor(b.shape, zeroed.field) for b in out.blocks])
    return is_zero_out_of(dsum, big, out.witness(), ordered=True)


def _cmd_cw_laser(args) -> int:
    field = field_from_descriptor(args.field)
    parts = [Fraction(v) for v in args.dist.split(",")]
    if len(parts) != 8:
        args.parser.error("--dist must be a,b,c,n,l1,l2,l3,p")
    dist = TypeDistribution(a=parts[0], b=parts[1], c=parts[2],
                            n=int(parts[3]), l1=int(parts[4]), l2=int(parts[5]),
                            l3=int(parts[6]), p=int(parts[7]), q=args.q)
    zeroed = laser_zero_out(args.q, dist, field=field)
    m_mod = args.m_mod if args.m_mod else 2 * dist.p + 1
    sset = salem_spencer(m_mod, method=args.method)
    out = laser_hash_degenerate(zeroed, sset, seed=args.seed)
    big = kron_power(cw_tensor(args.q, field), dist.p)
    ok = _laser_verified(out, zeroed, big)
    _write_text(args.out, dumps({
        "q": args.q, "p": dist.p, "modulus": m_mod, "seed": args.seed,
        "h": out.h, "log": out.log,
        "blocks": [{"shape": list(b.shape), "x_vars": list(b.x_vars),
                    "y_vars": list(b.y_vars), "z_vars": list(b.z_vars)}
                   for b in out.blocks],
        "verified": ok}))
    return 0 if ok else 1


def _cmd_salem_spencer(args) -> int:
    sset = salem_spencer(args.m_mod, method=args.method)
    _write_text(args.out, dumps({"modulus": sset.modulus,
                                 "elements": list(sset.elements),
                                 "size": len(sset)}))
    return 0


# --- group -------------------------------------------------------------------


def _cmd_group(args) -> int:
    field = field_from_descriptor(f"fp:{args.p}" if args.p else args.field)
    g = AbelianGroup(tuple(_ints(args.factors)) if args.factors else ())
    t_g = group_tensor(g, field).tensor
    algo = group_bilinear(g, field)
    ok = verify_computes(algo, t_g)
    _write_text(args.out, dumps({
        "factors": list(g.factors), "order": g.order, "exponent": g.exponent,
        "field": field.descriptor, "rank": algo.rank,
        "tensor": tensor_to_dict(t_g), "algorithm": algorithm_to_dict(algo),
        "verified": ok}))
    return 0 if ok else 1


# --- cost --------------------------------------------------------------------


def _profile_from_flag(spec: str, parser):
    kind, _, arg = spec.partition(":")
    try:
        x = float(arg) if arg else 1.0
        if kind == "const":
            return costs.constant_profile(x)
        if kind == "bounded":
            return costs.bounded_rank_profile(x)
        if kind == "polylog":
            return costs.polylog_rank_profile(x)
    except (ValueError, MMLabError):
        pass
    parser.error(f"bad profile {spec!r}; use const:EPS, bounded:A, or polylog:C")


def _cmd_cost(args) -> int:
    plot_path = None
    if args.formula == "standard-recursion":
        reports = [costs.standard_recursion_constant(
            args.n, args.t, args.k, tuple(_ints(args.costs)))]
    elif args.formula == "rect-reduction":
        reports = [costs.rect_reduction_bound(args.n, args.t, args.k,
                                              args.t_enc, args.t_dec)]
    elif args.formula == "remark":
        reports = [costs.remark_optimizer(args.m, args.h, args.k)]
    elif args.formula == "improved":
        reports = [costs.improved_constant_bounds(
            args.n_param, args.c1, args.c2, args.c3, omega0=args.omega0)]
    elif args.formula == "group-leading":
        reports = [costs.group_leading_constant(args.order_g, args.h, args.m,
                                                args.r, args.r_tg)]
    elif args.formula == "elkin":
        size = costs.elkin_size(args.m_mod, convention=args.convention)
        reports = [costs.CostReport(
            "progression-free size bound",
            {"M": args.m_mod, "convention": args.convention}, size,
            "elkin-size")]
    elif args.formula == "appendix-a":
        if args.table:
            grid = [(10, 10), (100, 100), (250, 250), (1000, 1000)]
            reports = [costs.appendix_a_exponent(n, s, args.convention)
                       for n, s in grid]
            if args.plot:
                if not args.out:
                    args.parser.error("--plot needs --out to place the figure")
                from .plots import exponent_figure
                plot_path = exponent_figure(
                    [r.inputs["N"] for r in reports],
                    [r.value for r in reports],
                    costs.LIMIT_EXPONENT,
                    str(Path(args.out).with_suffix(".png")))
        else:
            if args.plot:
                args.parser.error("--plot needs --table")
            if args.n is None or args.s is None:
                args.parser.error("provide --n and --s, or use --table")
            reports = [costs.appendix_a_exponent(args.n, args.s,
                                                 args.convention)]
    elif args.formula == "hf":
        reports = [costs.omega2_hf(_profile_from_flag(args.profile, args.parser),
                                   args.m)]
    elif args.formula == "recurrence":
        reports = [costs.omega2_recurrence(
            _profile_from_flag(args.profile, args.parser), args.m,
            base_g=args.base_g, o_constant=args.o_constant)]
    elif args.formula == "asymptotic-sum":
        shapes = [tuple(_ints(s)) for s in args.shapes.split(";")]
        reports = [costs.asymptotic_sum_omega(shapes, args.r, tol=args.tol)]
    else:  # pragma: no cover - argparse restricts choices
        args.parser.error(f"unknown cost formula {args.formula!r}")
    _write_text(args.out, _reports_csv(reports))
    if plot_path:
        sys.stderr.write(f"figure written to {plot_path}\n")
    return 0


# --- sparse ------------------------------------------------------------------


def _cmd_sparse_factor(args) -> int:
    text = Path(args.infile).read_text()
    if args.infile.endswith(".json"):
        x = bitmatrix_from_dict(loads(text))
    else:
        x = bitmatrix_from_text(text)
    x1, x2, report = sparse_factor(x, size_bound=args.size_bound)
    ratio = report["ratio"]
    report["ratio"] = None if ratio is None else show_number(ratio)
    _write_text(args.out, dumps({"x1": bitmatrix_to_dict(x1),
                                 "x2": bitmatrix_to_dict(x2),
                                 "report": report}))
    return 0


# --- parser ------------------------------------------------------------------


def _common(sub):
    sub.add_argument("--field", default="rational",
                     help="rational | fp:<p> | fpext:<p>:<deg>")
    sub.add_argument("--out", default=None, help="output path (default stdout)")
    sub.set_defaults(parser=sub)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mmlab",
        description="Exact laboratory for fast matrix multiplication.")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("multiply", help="multiply two matrices with a chosen engine")
    p.add_argument("lhs")
    p.add_argument("rhs")
    p.add_argument("--engine", default="naive",
                   choices=["naive", "recursive", "rect", "blocked"])
    p.add_argument("--alg", default=None, help="bilinear algorithm JSON")
    p.add_argument("--k", type=int, default=2, help="Kronecker power level")
    p.add_argument("--base", default=None, help="n,m,d base shape for blocked")
    p.add_argument("--order", default="last_axis_first",
                   choices=["last_axis_first", "first_axis_first"])
    p.add_argument("--format", default="json", choices=["json", "csv"])
    p.add_argument("--trace", action="store_true", help="emit per-stage CSV")
    p.set_defaults(func=_cmd_multiply)
    _common(p)

    p = subs.add_parser("verify", help="check an algorithm against a tensor")
    p.add_argument("--alg", required=True)
    p.add_argument("--tensor", default=None)
    p.set_defaults(func=_cmd_verify)
    _common(p)

    p = subs.add_parser("kron", help="per-stage cost table for a Kronecker power")
    p.add_argument("--matrix", required=True, help="counted-matrix JSON")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--order", default="last_axis_first",
                   choices=["last_axis_first", "first_axis_first"])
    p.set_defaults(func=_cmd_kron)
    _common(p)

    cw = subs.add_parser("cw", help="Coppersmith-Winograd tensor toolkit")
    cw_subs = cw.add_subparsers(dest="cw_command", required=True)

    p = cw_subs.add_parser("tensor")
    p.add_argument("--q", type=int, required=True)
    p.set_defaults(func=_cmd_cw_tensor)
    _common(p)

    p = cw_subs.add_parser("verify-border")
    p.add_argument("--q", type=int, required=True)
    p.set_defaults(func=_cmd_cw_verify_border)
    _common(p)

    p = cw_subs.add_parser("interp")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--mode", default="points", choices=["points", "roots"])
    p.set_defaults(func=_cmd_cw_interp)
    _common(p)

    p = cw_subs.add_parser("laser")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--dist", required=True, help="a,b,c,n,l1,l2,l3,p")
    p.add_argument("--m-mod", "--M", dest="m_mod", type=int, default=None)
    p.add_argument("--method", default="exhaustive",
                   choices=["exhaustive", "behrend"])
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_cw_laser)
    _common(p)

    p = cw_subs.add_parser("salem-spencer")
    p.add_argument("--m-mod", "--M", dest="m_mod", type=int, required=True)
    p.add_argument("--method", default="exhaustive",
                   choices=["exhaustive", "behrend"])
    p.set_defaults(func=_cmd_salem_spencer)
    _common(p)

    p = subs.add_parser("salem-spencer", help="progression-free set mod M")
    p.add_argument("--m-mod", "--M", dest="m_mod", type=int, required=True)
    p.add_argument("--method", default="exhaustive",
                   choices=["exhaustive", "behrend"])
    p.set_defaults(func=_cmd_salem_spencer)
    _common(p)

    p = subs.add_parser("group", help="group-algebra tensor and DFT algorithm")
    p.add_argument("--factors", default="", help="cyclic factors, e.g. 4,2")
    p.add_argument("--p", type=int, default=None, help="prime field shorthand")
    p.set_defaults(func=_cmd_group)
    _common(p)

    cost = subs.add_parser("cost", help="formula evaluators, CSV out")
    cost_subs = cost.add_subparsers(dest="formula", required=True)

    p = cost_subs.add_parser("standard-recursion")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--costs", required=True, help="enc_x,enc_y,dec")
    p.set_defaults(func=_cmd_cost)
    _common(p)

    p = cost_subs.add_parser("rect-reduction")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--t-enc", dest="t_enc", type=int, required=True)
    p.add_argument("--t-dec", dest="t_dec", type=int, required=True)
    p.set_defaults(func=_cmd_cost)
    _common(p)

    p = cost_subs.add_parser("remark")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--h", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=_cmd_cost)
    _common(p)

    p = cost_subs.add_parser("improved")
    p.add_argument("--n-param", dest="n_param", type=int, required=True)
    p.add_argument("--c1", type=float, default=1.0)
    p.add_argument("--c2", type=float, default=1.0)
    p.add_argument("--c3", type=float, default=1.0)
    p.add_argument("--omega0", type=float, default=2.372)
    p.set_defaults(func=_cmd_cost)
    _common(p)

    p = cost_subs.add_parser("group-leading")
    p.add_argument("--order-g", dest="order_g", type=int, required=True)
    p.add_argument("--h", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--r-tg", dest="r_tg", type=int, required=True)
    p.set_defaults(func=_cmd_cost)
    _common(p)

    p = cost_subs.add_parser("elkin")
    p.add_argument("--m-mod", "--M", dest="m_mod", type=int, required=True)
    p.add_argument("--convention", default="log2", choices=["log2", "ln"])
    p.set_defaults(func=_cmd_cost)
    _common(p)

    p = cost_subs.add_parser("appendix-a")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--s", type=int, default=None)
    p.add_argument("--convention", default="display",
                   choices=["display", "binomial-log2", "binomial-ln"])
    p.add_argument("--table", action="store_true",
                   help="emit the four-row N=S table")
    p.add_argument("--plot", action="store_true",
                   help="also render the exponent curve next to the CSV")
    p.set_defaults(func=_cmd_cost)
    _common(p)

    p = cost_subs.add_parser("hf")
    p.add_argument("--profile", required=True,
                   help="const:EPS | bounded:A | polylog:C")
    p.add_argument("--m", type=int, required=True)
    p.set_defaults(func=_cmd_cost)
    _common(p)

    p = cost_subs.add_parser("recurrence")
    p.add_argument("--profile", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--base-g", dest="base_g", type=float, default=None)
    p.add_argument("--o-constant", dest="o_constant", type=float, default=None)
    p.set_defaults(func=_cmd_cost)
    _common(p)

    p = cost_subs.add_parser("asymptotic-sum")
    p.add_argument("--shapes", required=True, help="n,m,d;n,m,d;...")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=_cmd_cost)
    _common(p)

    sparse = subs.add_parser("sparse", help="F2 sparse factorization")
    sparse_subs = sparse.add_subparsers(dest="sparse_command", required=True)
    p = sparse_subs.add_parser("factor")
    p.add_argument("--in", dest="infile", required=True,
                   help="bit-matrix JSON or dense 0/1 text")
    p.add_argument("--size-bound", dest="size_bound", type=int, default=None)
    p.set_defaults(func=_cmd_sparse_factor)
    _common(p)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else (0 if code is None else 2)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MMLabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
