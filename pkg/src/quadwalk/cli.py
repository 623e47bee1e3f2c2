"""Command-line entry point: `quadwalk <subcommand> ...`.

Exact rationals are written as "num/den" strings, always next to a float.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction

from .constants import (
    ExactConstant,
    StepLaw,
    c1_c2_exact,
    c1_c2_special_paths,
    c_theta_exact,
    c_theta_series,
)
from .contfrac import backward_cf, convergents, regular_cf
from .diophantine import beck_sequence, dsum
from .errors import ParseError, QuadWalkError, RationalInputError
from .forms import class_number, pell_smallest, unit_power_display
from .qirr import QuadIrrational, is_square
from .walk import WalkConfig, resolve_threads, run_experiment
from .zeta import SurdValue, dedekind_special, module_cycle, zeta_module_neg, zeta_pair_pos, zeta_terms

SCHEMA_VERSION = 1

C1C2_D = (2, 3, 5, 6, 7, 10, 11, 13, 14)
EPSILON_D = (8, 12, 20, 24, 28, 32, 40, 44, 5, 13, 17, 21, 29, 33, 37)
DEDEKIND_D = (2, 3, 5, 6, 7, 10, 11, 13, 14, 15, 17, 19, 21, 22, 23)


# ---------------------------------------------------------------- parsing

_INT = r"[+-]?\d+"


def _ints(body: str, text: str, offset: int, count: int) -> list[int]:
    parts = body.split(",")
    if len(parts) != count:
        raise ParseError(f"expected {count} comma-separated fields, got {len(parts)}", text, offset)
    out = []
    col = offset
    for part in parts:
        if not re.fullmatch(_INT, part.strip()):
            raise ParseError(f"not an integer: {part!r}", text, col)
        out.append(int(part))
        col += len(part) + 1
    return out


def parse_alpha(text: str) -> QuadIrrational:
    """`quad:p,q,r,d`, `poly:a,b,c,+|-`, `phi` or `sqrt<d>`."""
    s = text.strip()
    if s == "phi":
        return QuadIrrational(1, 1, 2, 5)
    m = re.fullmatch(r"sqrt(\d+)", s)
    if m:
        n = int(m.group(1))
        if is_square(n):
            raise RationalInputError(f"sqrt{n} is rational")
        return QuadIrrational(0, 1, 1, n)
    if s.startswith("quad:"):
        p, q, r, d = _ints(s[5:], text, 5, 4)
        return QuadIrrational(p, q, r, d)
    if s.startswith("poly:"):
        body = s[5:]
        head, _, sign = body.rpartition(",")
        if sign not in ("+", "-"):
            raise ParseError("last field must be + or -", text, 5 + len(head) + 1)
        a, b, c = _ints(head, text, 5, 3)
        return QuadIrrational.from_poly(a, b, c, sign)
    raise ParseError("expected quad:p,q,r,d | poly:a,b,c,+|- | phi | sqrt<d>", text, 0)


def _int_literal(text: str) -> int:
    # plain integers or 1e6 style literals for sizes
    text = text.strip()
    if re.fullmatch(r"\d+(\.\d+)?[eE]\d+", text):
        v = Decimal(text)
        if v != v.to_integral_value():
            raise ValueError(text)
        return int(v)
    return int(text)


def parse_grid(text: str) -> list[int]:
    """`lo:hi:xK` (geometric), `lo:hi:+K` (arithmetic) or a comma list."""
    num = r"(\d+(?:\.\d+)?(?:[eE]\d+)?)"
    m = re.fullmatch(num + ":" + num + r":([x+])(\d+)", text.strip())
    try:
        if m:
            lo, hi, kind, step = _int_literal(m.group(1)), _int_literal(m.group(2)), m.group(3), int(m.group(4))
            if step < (2 if kind == "x" else 1) or lo < 1:
                raise ParseError("bad grid step", text, text.index(kind))
            out, n = [], lo
            while n <= hi:
                out.append(n)
                n = n * step if kind == "x" else n + step
            return out
        return [_int_literal(v) for v in text.split(",")]
    except ValueError:
        raise ParseError("expected lo:hi:xK, lo:hi:+K or a comma list", text, 0) from None


def _parse_int(text: str) -> int:
    try:
        return _int_literal(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None


# ---------------------------------------------------------------- serialization


def frac(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def alpha_json(a: QuadIrrational) -> dict:
    return {
        "text": str(a),
        "p": a.p,
        "q": a.q,
        "r": a.r,
        "d": a.d,
        "minpoly": list(a.minpoly),
        "D": a.D,
        "float": float(a),
    }


def constant_json(c: ExactConstant) -> dict:
    coeff, d, t, u = c.canonical
    return {
        "exact": c.display(),
        "coeff": frac(coeff),
        "d": d,
        "eta": str(c.eta),
        "eta_t": t,
        "eta_u": u,
        "float": float(c),
    }


def surd_json(v: SurdValue) -> dict:
    return {"exact": str(v), "coeff": frac(v.coeff), "d": v.d, "pi_power": v.pi_power, "float": float(v)}


@dataclass
class Output:
    payload: dict
    rows: list[dict] = field(default_factory=list)


def _render(out: Output, fmt: str) -> str:
    if fmt == "json":
        body = {"schema_version": SCHEMA_VERSION, **out.payload}
        return json.dumps(body, ensure_ascii=False, indent=2) + "\n"
    rows = out.rows or [_flatten(out.payload)]
    keys: list[str] = []
    for r in rows:
        for k in r:
            if k not in keys:
                keys.append(k)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=["schema_version", *keys], lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({"schema_version": SCHEMA_VERSION, **r})
        return buf.getvalue()
    cells = [[str(r.get(k, "")) for k in keys] for r in rows]
    widths = [max(len(k), *(len(c[i]) for c in cells)) for i, k in enumerate(keys)]
    lines = ["  ".join(k.ljust(w) for k, w in zip(keys, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, list):
            out[key] = json.dumps(v, ensure_ascii=False)
        else:
            out[key] = v
    return out


# ---------------------------------------------------------------- subcommands


def cmd_constants(args) -> Output:
    alpha = parse_alpha(args.alpha)
    c1, c2 = c1_c2_exact(alpha)
    unit = c1.unit
    payload = {
        "command": "constants",
        "alpha": alpha_json(alpha),
        "epsilon": {"D": unit.D, "t0": unit.t0, "u0": unit.u0, "text": str(unit.eps)},
        "c1": constant_json(c1),
        "c2": constant_json(c2),
    }
    special = c1_c2_special_paths(alpha)
    if special is not None:
        payload["special_path"] = {"path": special.path, "c1": constant_json(special.c1), "c2": constant_json(special.c2)}
    if args.series:
        ser = {}
        for theta in (2, 4):
            res = c_theta_series(alpha, theta, tol=args.tol)
            ser[f"theta{theta}"] = {
                "value": res.value,
                "tail_bound": res.tail_bound,
                "n_max": res.n_max,
                "exact": c_theta_exact(alpha, theta),
            }
        payload["series"] = ser
    row = {"alpha": str(alpha), "c1": c1.display(), "c1_float": float(c1), "c2": c2.display(), "c2_float": float(c2)}
    return Output(payload, [row])


def cmd_zeta(args) -> Output:
    if args.dedekind is not None:
        rows = []
        for s in args.s:
            v = dedekind_special(args.dedekind, s)
            rows.append({"d": args.dedekind, "s": s, **{k: v for k, v in surd_json(v).items() if k != "d"}})
        return Output({"command": "zeta", "dedekind": rows}, rows)
    if args.alpha is None:
        raise ParseError("zeta needs --alpha or --dedekind")
    alpha = parse_alpha(args.alpha)
    cyc = module_cycle(alpha)
    cycle = [{"w": str(e.w), "digit": e.digit, "form": str(e.form)} for e in cyc.entries]
    values, rows = [], []
    for k in args.k:
        terms = zeta_terms(cyc, k)
        total = zeta_module_neg(cyc, k)
        values.append({"k": k, "value": frac(total), "float": float(total), "terms": [frac(t) for t in terms]})
        rows.append({"k": k, "value": frac(total), "float": float(total)})
    pos = {f"pair_at_{k}": surd_json(zeta_pair_pos(cyc, k)) for k in (2, 4)}
    payload = {
        "command": "zeta",
        "alpha": alpha_json(alpha),
        "D": cyc.D,
        "f": cyc.f,
        "i0": cyc.i0,
        "cycle": cycle,
        "negative": values,
        "positive": pos,
    }
    return Output(payload, rows)


def _pell_row(D: int) -> dict:
    u = pell_smallest(D)
    et, eu, k, text = unit_power_display(D)
    return {"D": D, "t0": u.t0, "u0": u.u0, "epsilon": str(u.eps), "eta_t": et, "eta_u": eu, "power": k, "display": text}


def cmd_pell(args) -> Output:
    row = _pell_row(args.D)
    return Output({"command": "pell", **row}, [row])


def cmd_classno(args) -> Output:
    data = class_number(args.D)
    reps = [str(q) for q in data.representatives]
    rows = [
        {"class": i, "representative": str(q), "cycle_length": len(c)}
        for i, (q, c) in enumerate(zip(data.representatives, data.cycles))
    ]
    payload = {
        "command": "classno",
        "D": data.D,
        "h": data.h,
        "representatives": reps,
        "cycles": [[str(q) for q in c] for c in data.cycles],
    }
    return Output(payload, rows)


def cmd_cf(args) -> Output:
    alpha = parse_alpha(args.alpha)
    rc = regular_cf(alpha)
    bc = backward_cf(alpha)
    conv = []
    for k in range(args.k + 1):
        p, q = convergents(rc, k)
        conv.append({"k": k, "p": p, "q": q})
    payload = {
        "command": "cf",
        "alpha": alpha_json(alpha),
        "regular": {"a0": rc.a0, "preperiod": list(rc.preperiod), "period": list(rc.period)},
        "backward": {"b0": bc.b0, "preperiod": list(bc.preperiod), "period": list(bc.period), "i0": bc.i0},
        "convergents": conv,
    }
    return Output(payload, conv)


def cmd_dsum(args) -> Output:
    alpha = parse_alpha(args.alpha)
    cps = parse_grid(args.checkpoints) if args.checkpoints else None
    rep = dsum(alpha, args.theta, args.M, checkpoints=cps, workers=resolve_threads(args.threads))
    rows = [{"M": m, "sum": s, "ratio_log": r} for m, s, r in rep.ratios()]
    slopes = [{"M1": a, "M2": b, "slope": s} for a, b, s in rep.slopes]
    payload = {"command": "dsum", "alpha": alpha_json(alpha), "theta": args.theta, "M": rep.M, "sum": rep.sum}
    payload["checkpoints"] = rows
    payload["slopes"] = slopes
    if args.theta in (2, 4):
        payload["exact_slope"] = c_theta_exact(alpha, int(args.theta))
    return Output(payload, rows)


def cmd_beck(args) -> Output:
    rep = beck_sequence(args.a, args.rho, args.kmax)
    rows = [
        {
            "index": c.index,
            "block": c.block,
            "M": c.M,
            "log_M": c.log_M,
            "ratio_theta2": c.ratio_theta2,
            "ratio_theta4": c.ratio_theta4,
            "method": c.method,
            "error_bound_theta2": c.error_bound_theta2,
            "error_bound_theta4": c.error_bound_theta4,
        }
        for c in rep.checkpoints
    ]
    payload = {
        "command": "beck",
        "a": rep.a,
        "rho": rep.rho,
        "k_max": rep.k_max,
        "checkpoints": [{k: (str(v) if k == "M" else v) for k, v in r.items()} for r in rows],
    }
    # M can be astronomically large; keep CSV cells as exact integer text
    return Output(payload, [{**r, "M": str(r["M"])} for r in rows])


def cmd_walk(args) -> Output:
    alpha = parse_alpha(args.alpha)
    law = StepLaw.parse(args.law)
    config = WalkConfig(law, alpha, tuple(parse_grid(args.ngrid)), args.trials, args.seed, args.fourier_cut)
    st = run_experiment(config, threads=args.threads)
    rows = st.rows()

    def fit(f):
        lo, hi = f.ci()
        return {"slope": f.slope, "slope_se": f.slope_se, "ci95": [lo, hi], "intercept": f.intercept,
                "chi2": f.chi2, "residuals": list(f.residuals)}

    pred = st.prediction
    payload = {
        "command": "walk",
        "alpha": alpha_json(alpha),
        "law": str(law),
        "trials": config.trials,
        "seed": config.seed,
        "N_grid": list(config.N_grid),
        "fit_mean": fit(st.fit_E),
        "fit_var": fit(st.fit_V),
        "prediction": {
            "L": pred.L,
            "sigma2": frac(pred.sigma2),
            "L_alpha": str(pred.L_alpha),
            "c1": constant_json(pred.c1),
            "c2": constant_json(pred.c2),
            "A_E": pred.A_E,
            "A_V": pred.A_V,
        },
        "per_N": rows,
    }
    if st.fourier_check:
        payload["fourier_check"] = st.fourier_check
    if args.summary:
        with open(args.summary, "w", encoding="utf-8") as fh:
            fh.write(_render(Output(payload), "json"))
    return Output(payload, rows)


def _c1c2_rows() -> Output:
    rows = []
    alphas = [("phi", QuadIrrational(1, 1, 2, 5))] + [(f"sqrt{d}", QuadIrrational(0, 1, 1, d)) for d in C1C2_D]
    for name, a in alphas:
        c1, c2 = c1_c2_exact(a)
        rows.append({"alpha": name, "c1": c1.display(), "c1_float": float(c1), "c2": c2.display(), "c2_float": float(c2)})
    return Output({"command": "tables", "which": "c1c2", "rows": rows}, rows)


def _epsilon_rows() -> Output:
    rows = [_pell_row(D) for D in EPSILON_D]
    return Output({"command": "tables", "which": "epsilon", "rows": rows}, rows)


def _dedekind_rows() -> Output:
    rows = []
    for d in DEDEKIND_D:
        z2, z4 = dedekind_special(d, 2), dedekind_special(d, 4)
        rows.append({"d": d, "zeta2": str(z2), "zeta2_float": float(z2), "zeta4": str(z4), "zeta4_float": float(z4)})
    return Output({"command": "tables", "which": "zeta", "rows": rows}, rows)


def cmd_tables(args) -> Output:
    return {"c1c2": _c1c2_rows, "epsilon": _epsilon_rows, "zeta": _dedekind_rows}[args.which]()


# ---------------------------------------------------------------- wiring


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "table"), default=None)
    common.add_argument("--threads", type=int, default=None, help="worker count (default: $QUADWALK_THREADS or 1)")

    ap = argparse.ArgumentParser(prog="quadwalk", description="Exact constants and Monte Carlo for quadratic-irrational walks.")
    sub = ap.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("constants", parents=[common], help="exact c1, c2")
    p.add_argument("--alpha", required=True)
    p.add_argument("--series", action="store_true", help="also evaluate the representation-number series")
    p.add_argument("--tol", type=float, default=1e-3)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("zeta", parents=[common], help="module and Dedekind zeta values")
    p.add_argument("--alpha")
    p.add_argument("--k", type=int, nargs="+", default=[1, 3])
    p.add_argument("--dedekind", type=int, metavar="d")
    p.add_argument("--s", type=int, nargs="+", default=[2, 4], choices=(2, 4))
    p.set_defaults(func=cmd_zeta)

    p = sub.add_parser("pell", parents=[common], help="smallest totally positive unit of discriminant D")
    p.add_argument("--D", type=int, required=True)
    p.set_defaults(func=cmd_pell)

    p = sub.add_parser("classno", parents=[common], help="class number and reduced cycles")
    p.add_argument("--D", type=int, required=True)
    p.set_defaults(func=cmd_classno)

    p = sub.add_parser("cf", parents=[common], help="regular and backward continued fractions")
    p.add_argument("--alpha", required=True)
    p.add_argument("--k", type=int, default=5, help="last convergent index")
    p.set_defaults(func=cmd_cf)

    p = sub.add_parser("dsum", parents=[common], help="sum of 1/(m ||m alpha||)^theta")
    p.add_argument("--alpha", required=True)
    p.add_argument("--theta", type=float, default=2.0)
    p.add_argument("--M", type=_parse_int, required=True)
    p.add_argument("--checkpoints", help="grid of intermediate M values, e.g. 1000:1000000:x10")
    p.set_defaults(func=cmd_dsum)

    p = sub.add_parser("beck", parents=[common], help="non-convergence construction")
    p.add_argument("--a", type=int, default=10)
    p.add_argument("--rho", type=int, default=2)
    p.add_argument("--kmax", type=int, default=3)
    p.set_defaults(func=cmd_beck)

    p = sub.add_parser("walk", parents=[common], help="Monte Carlo of W2 for the lattice walk")
    p.add_argument("--alpha", required=True)
    p.add_argument("--law", required=True, help="v1:p1,v2:p2,... with rational probabilities")
    p.add_argument("--ngrid", default="1024:65536:x2")
    p.add_argument("--trials", type=_parse_int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--fourier-cut", type=_parse_int, default=None)
    p.add_argument("--summary", help="also write the JSON summary to this path")
    p.set_defaults(func=cmd_walk, default_format="csv")

    p = sub.add_parser("tables", parents=[common], help="reference tables")
    p.add_argument("--which", choices=("c1c2", "epsilon", "zeta"), required=True)
    p.set_defaults(func=cmd_tables)
    return ap


def dispatch(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    fmt = args.format or getattr(args, "default_format", "json")
    try:
        out = args.func(args)
    except (QuadWalkError, ValueError, ZeroDivisionError, OverflowError) as exc:
        err = {
            "schema_version": SCHEMA_VERSION,
            "error": {"code": getattr(exc, "code", "value"), "type": type(exc).__name__, "message": str(exc)},
        }
        if isinstance(exc, ParseError):
            err["error"]["column"] = exc.column + 1
        stderr.write(json.dumps(err, ensure_ascii=False) + "\n")
        return 1
    stdout.write(_render(out, fmt))
    return 0


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
