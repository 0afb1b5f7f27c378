"""Command-line front end.

Exit status: 0 on success, 1 on usage errors (bad flags, malformed input),
2 on domain errors (the message starts with the error code).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile

import numpy as np

from . import factorization, flatness, generators, riesz
from .errors import FlatPolyError
from .poly import Grid, TrigPoly, default_grid, normalize_l2

FAMILIES = ("classb", "gauss", "hl", "spike", "blaschke")
SINGULARITY_COLUMNS = ("j", "N", "r", "s", "A", "series5", "series6")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# -- formatting --------------------------------------------------------------

def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(row[h]) for h in header])
    return buf.getvalue()


def write_out(path, text: str):
    """Write atomically (temp file + rename); '-' or None means stdout."""
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".flatpoly-")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


def read_poly(path) -> TrigPoly:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}")
    try:
        return TrigPoly.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}")
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{path}: bad polynomial schema: {exc}")


# -- argument parsing helpers ---------------------------------------------------

def parse_ints(text: str) -> list[int]:
    """'2..5,9' -> [2, 3, 4, 5, 9]."""
    out = []
    try:
        for part in text.split(","):
            part = part.strip()
            if ".." in part:
                lo, hi = part.split("..")
                out.extend(range(int(lo), int(hi) + 1))
            elif part:
                out.append(int(part))
    except ValueError:
        raise UsageError(f"bad integer list {text!r}")
    return out


def parse_floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad number list {text!r}")


def parse_zeros(text: str) -> list[complex]:
    vals = parse_floats(text)
    if len(vals) % 2:
        raise UsageError("--zeros needs re,im pairs")
    return [complex(a, b) for a, b in zip(vals[::2], vals[1::2])]


def grid_arg(args, *polys) -> Grid:
    if getattr(args, "grid", None):
        return Grid(args.grid)
    return default_grid(*polys)


def pow2(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
    if v < 1 or v & (v - 1):
        raise argparse.ArgumentTypeError("grid size must be a power of two")
    return v


def _need(args, name):
    v = getattr(args, name)
    if v is None:
        raise UsageError(f"--{name} is required for family {args.family}")
    return v


def build_one(args) -> TrigPoly:
    fam = args.family
    if fam == "classb":
        if args.exponents:
            return generators.class_b(parse_ints(args.exponents))
        if args.consecutive:
            return generators.class_b(generators.ClassBSpec.consecutive(_need(args, "m")))
        raise UsageError("classb needs --exponents or --consecutive --m")
    if fam == "gauss":
        return generators.gauss_fresnel(_need(args, "n"))
    if fam == "hl":
        return generators.hardy_littlewood(_need(args, "n"), args.c)
    if fam == "spike":
        return generators.single_spike(_need(args, "n"), _need(args, "delta"))
    if fam == "blaschke":
        if not args.zeros:
            raise UsageError("blaschke needs --zeros")
        return generators.blaschke_partial_sum(parse_zeros(args.zeros), _need(args, "degree"))
    raise UsageError(f"unknown family {fam}")


def build_sequence(args) -> list[TrigPoly]:
    """Sequence for sweep/egorov from a family and a parameter range."""
    fam = args.family
    if fam is None:
        raise UsageError("--family is required")
    rng = np.random.default_rng(args.seed)
    if fam == "classb":
        ms = parse_ints(_need(args, "m"))
        if args.consecutive:
            return [generators.class_b(generators.ClassBSpec.consecutive(m)) for m in ms]
        if args.random:
            out = []
            for m in ms:
                exps = np.sort(rng.choice(np.arange(1, args.max_exp + 1), m - 1, replace=False))
                out.append(generators.class_b(exps.tolist()))
            return out
        raise UsageError("classb sweep needs --consecutive or --random")
    ns = parse_ints(_need(args, "n"))
    if fam == "gauss":
        return [generators.gauss_fresnel(n) for n in ns]
    if fam == "hl":
        return [generators.hardy_littlewood(n, args.c) for n in ns]
    if fam == "spike":
        sched = {"inverse": lambda j: 1.0 / j, "geometric": lambda j: 2.0 ** -j,
                 "fixed": lambda j: args.delta}[args.schedule]
        if args.schedule == "fixed" and args.delta is None:
            raise UsageError("--schedule fixed needs --delta")
        return [generators.single_spike(n, sched(n)) for n in ns]
    if fam == "blaschke":
        if not args.zeros:
            raise UsageError("blaschke needs --zeros")
        zs = parse_zeros(args.zeros)
        return [normalize_l2(generators.blaschke_partial_sum(zs, d)) for d in ns]
    raise UsageError(f"unknown family {fam}")


# -- commands ----------------------------------------------------------------

def cmd_generate(args):
    p = build_one(args)
    write_out(args.output, dump_json(p.to_json_obj()))


def analyze_poly(p: TrigPoly, grid: Grid, tau: float) -> dict:
    return flatness.flatness_report(p, grid, tau).to_dict()


def cmd_analyze(args):
    reports = []
    for path in args.inputs:
        p = read_poly(path)
        rep = analyze_poly(p, grid_arg(args, p), args.tau)
        rep["input"] = path
        reports.append(rep)
    write_out(args.output, dump_json(reports[0] if len(reports) == 1 else reports))


def factor_json(p: TrigPoly, grid: Grid) -> dict:
    fac = factorization.inner_outer(p, grid)
    out = {
        "inside": [{"re": a.real, "im": a.imag} for a in fac.inside.tolist()],
        "outside": [{"re": a.real, "im": a.imag} for a in fac.outside.tolist()],
        "gamma": {"re": fac.gamma.real, "im": fac.gamma.imag},
        "monomial": fac.monomial,
        "q": fac.Q.to_json_obj(),
        "q0": fac.q0,
        "boundary_roots": fac.boundary_roots,
        "jensen_residual": factorization.jensen_residual(p, fac, grid),
        "checks": fac.checks,
    }
    return out


def cmd_factor(args):
    p = read_poly(args.input)
    write_out(args.output, dump_json(factor_json(p, grid_arg(args, p))))


def cmd_sweep(args):
    seq = build_sequence(args)
    grid = Grid(args.grid) if args.grid else None
    table = flatness.ratio_diagnostics(seq, grid)
    if args.format == "json":
        write_out(args.output, dump_json({
            "rows": table.rows,
            "summary": {"max_N_over_L2": table.max_N_over_L2,
                        "r_over_N_nondecreasing": table.r_over_N_nondecreasing,
                        "r_over_N_max": table.r_over_N_max,
                        "r_over_N_min": table.r_over_N_min,
                        "r_over_2N_last": table.r_over_2N_last}}))
    else:
        write_out(args.output, to_csv(flatness.SWEEP_COLUMNS, table.rows))


def cmd_riesz(args):
    polys = [read_poly(p) for p in args.inputs]
    if args.repeat:
        if len(polys) != 1:
            raise UsageError("--repeat needs exactly one input")
        polys = polys * args.repeat
    if args.scales:
        scales = parse_ints(args.scales)
        if len(scales) != len(polys):
            raise UsageError(f"{len(scales)} scales for {len(polys)} factors")
        fam = riesz.ScaledFamily(tuple(zip(polys, scales)))
        res = riesz.is_dissociated(fam)
        fam = riesz.ScaledFamily(fam.factors, verified=res.ok)
        if not res.ok:
            sys.stderr.write(f"warning: family not dissociated: {res.collision}\n")
    elif args.geometric:
        fam = riesz.ScaledFamily(tuple((p, args.geometric ** j) for j, p in enumerate(polys, 1)))
        fam = riesz.ScaledFamily(fam.factors, verified=riesz.is_dissociated(fam).ok)
    else:
        fam = riesz.choose_scales(polys)
    depth = len(fam) if args.depth is None else args.depth
    grid = Grid(args.grid) if args.grid else None
    state = riesz.partial_product(fam, depth, grid)
    lines = []
    for d in range(depth + 1):
        if d == 0:
            new = [(0, 1 + 0j)]
        else:
            e, c = state.new_terms[d - 1]
            new = list(zip(e.tolist(), c.tolist()))
        if args.window is not None:
            new = [(k, c) for k, c in new if abs(k) <= args.window]
        lines.append(json.dumps({
            "depth": d, "scale": fam.scales[d - 1] if d else None,
            "l1": state.l1_trace[d], "mass": state.mass_trace[d],
            "coeff0": state.coeff0_trace[d],
            "new_coeffs": [{"exp": k, "re": c.real, "im": c.imag} for k, c in new]}))
    write_out(args.output, "\n".join(lines) + "\n")
    if args.trace_csv:
        rows = [{"depth": d, "l1": v} for d, v in enumerate(state.l1_trace)]
        write_out(args.trace_csv, to_csv(("depth", "l1"), rows))


class _Row:
    def __init__(self, N, L, r):
        self.N, self.L, self.r = N, L, r


def read_csv(path) -> list[dict]:
    try:
        with open(path, newline="") as fh:
            lines = [ln for ln in fh if not ln.startswith("#")]
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}")
    return list(csv.DictReader(lines))


def cmd_singularity(args):
    rows = read_csv(args.input)
    try:
        reps = [_Row(int(r["N"]), float(r["L"]), float(r["r"]) if r["r"] else None) for r in rows]
    except KeyError as exc:
        raise UsageError(f"{args.input}: missing column {exc}")
    except ValueError as exc:
        raise UsageError(f"{args.input}: {exc}")
    lam = parse_floats(args.lam) if args.lam else None
    diag = riesz.singularity_diagnostic(reps, lam, witness=args.witness)
    out = [{"j": j + 1, "N": diag.N[j], "r": diag.r[j], "s": diag.s[j],
            "A": diag.partial_sums[j], "series5": diag.series5[j], "series6": diag.series6[j]}
           for j in range(len(diag.s))]
    text = to_csv(SINGULARITY_COLUMNS, out) + f"# verdict: {diag.verdict} (heuristic)\n"
    write_out(args.output, text)


def vdc_spec_json(spec, cert):
    return {"kind": spec.kind, "a": spec.a, "b": spec.b, "theta": spec.theta,
            "N": spec.N, "c": spec.c, "lhs": cert.lhs, "rhs": cert.rhs, "ok": cert.ok}


def random_vdc_specs(count, seed):
    rng = np.random.default_rng(seed)
    specs = []
    for _ in range(count):
        N = int(rng.integers(2, 2000))
        specs.append(generators.VdcFunctionSpec("quadratic", 0, N - 1,
                                                theta=float(rng.uniform(0, 1)), N=N))
    for _ in range(count):
        b = int(rng.integers(2, 2000))
        c = float(rng.choice([-1, 1]) * rng.uniform(0.05, 5.0))
        specs.append(generators.VdcFunctionSpec("xlogx", 1, b, theta=float(rng.uniform(0, 1)), c=c))
    return specs


def cmd_vdc(args):
    if args.random:
        specs = random_vdc_specs(args.random, args.seed)
    else:
        if args.b is None:
            raise UsageError("--b is required (or use --random)")
        specs = [generators.VdcFunctionSpec(args.kind, args.a, args.b, theta=args.theta,
                                            N=args.N, c=args.c)]
    res = [vdc_spec_json(s, generators.vdc_certificate(s)) for s in specs]
    write_out(args.output, dump_json(res[0] if len(res) == 1 else res))
    if not all(r["ok"] for r in res):
        raise FlatPolyError("van der Corput bound violated")


def cmd_egorov(args):
    seq = [read_poly(p) for p in args.inputs] if args.inputs else build_sequence(args)
    grid = Grid(args.grid) if args.grid else None
    picks = flatness.egorov_select(seq, grid, args.length)
    write_out(args.output, dump_json({
        "selected": [p.index for p in picks],
        "picks": [{"index": p.index, "level": p.level, "deviation_measure": p.deviation_measure}
                  for p in picks]}))


def cmd_plot(args):
    rows = read_csv(args.input)
    cols = [c.strip() for c in args.columns.split(",")]
    if rows:
        missing = [c for c in cols if c not in rows[0]]
        if missing:
            raise UsageError(f"unknown column(s) {missing}; have {list(rows[0])}")
    lines = ["# " + " ".join(cols)]
    for r in rows:
        lines.append(" ".join(r[c] if r[c] != "" else "nan" for c in cols))
    write_out(args.output, "\n".join(lines) + "\n")


# -- parser ------------------------------------------------------------------

def _family_flags(p, sweep=False):
    p.add_argument("--family", choices=FAMILIES, required=not sweep)
    p.add_argument("--n", type=str if sweep else int, help="degree/term count (range in sweeps)")
    p.add_argument("--m", type=str if sweep else int, help="class-B term count (range in sweeps)")
    p.add_argument("--c", type=float, default=1.0, help="Hardy-Littlewood constant")
    p.add_argument("--delta", type=float)
    p.add_argument("--exponents", help="class-B exponents, comma list")
    p.add_argument("--consecutive", action="store_true", help="class-B exponents 1..m-1")
    p.add_argument("--zeros", help="Blaschke zeros as re,im,re,im,...")
    p.add_argument("--degree", type=int, help="Blaschke partial-sum degree")
    if sweep:
        p.add_argument("--random", action="store_true", help="random class-B exponents")
        p.add_argument("--max-exp", type=int, default=64)
        p.add_argument("--schedule", choices=("inverse", "geometric", "fixed"), default="inverse",
                       help="spike delta_j: 1/j, 2^-j or --delta")
        p.add_argument("--seed", type=int, default=42)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="flatpoly", description="Flatness diagnostics for trigonometric polynomials.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="build a polynomial and write its JSON")
    _family_flags(p)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("analyze", help="flatness report for polynomial JSON files")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--grid", type=pow2)
    p.add_argument("--tau", type=float, default=0.1)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("factor", help="inner/outer factorization")
    p.add_argument("input")
    p.add_argument("--grid", type=pow2)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_factor)

    p = sub.add_parser("sweep", help="ratio table over a family")
    _family_flags(p, sweep=True)
    p.add_argument("--grid", type=pow2)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("riesz", help="partial generalized Riesz products")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--repeat", type=int, help="use the single input this many times")
    p.add_argument("--scales", help="explicit scales, comma list")
    p.add_argument("--geometric", type=int, help="scales q, q^2, q^3, ...")
    p.add_argument("--depth", type=int)
    p.add_argument("--window", type=int, help="only list new coefficients with |exp| <= window")
    p.add_argument("--grid", type=pow2)
    p.add_argument("--trace-csv")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_riesz)

    p = sub.add_parser("singularity", help="divergence criterion from a sweep CSV")
    p.add_argument("input")
    p.add_argument("--lambda", dest="lam", help="lambda_j values, comma list")
    p.add_argument("--witness", type=float, default=10.0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_singularity)

    p = sub.add_parser("vdc-check", help="check the van der Corput bound")
    p.add_argument("--kind", choices=("quadratic", "xlogx"), default="quadratic")
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--N", type=int, default=1)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float)
    p.add_argument("--random", type=int, help="check this many seeded specs of each kind")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_vdc)

    p = sub.add_parser("egorov", help="Egorov subsequence selection")
    p.add_argument("inputs", nargs="*")
    _family_flags(p, sweep=True)
    p.add_argument("--length", type=int)
    p.add_argument("--grid", type=pow2)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_egorov)

    p = sub.add_parser("plot", help="CSV table to whitespace-separated .dat columns")
    p.add_argument("input")
    p.add_argument("--columns", required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_plot)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"flatpoly: usage error: {exc}\n")
        return 1
    except FlatPolyError as exc:
        sys.stderr.write(f"flatpoly: {exc.code}: {exc}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
