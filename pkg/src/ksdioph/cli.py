"""Command-line front end: reproducible experiments with machine-readable
CSV/JSON outputs.

Exit codes: 0 success, 2 inconclusive or budget exceeded, 1 errors.
Configuration comes from an optional `key = value` text file plus flags
(flags win); the seed fully determines all sampling.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import mpmath
import numpy as np

from . import construct as con
from . import diophantine as dio
from . import flows
from .fields import Field, FieldError, create_field, field_report, parse_field_file
from .lattices import KSVector

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCONCLUSIVE = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(EXIT_ERROR)


@dataclass
class RunConfig:
    field_path: str = None
    precision: int = None
    out: str = None
    seed: int = 0
    fmt: str = "csv"
    extra: dict = None


def _load_config(path):
    cfg = {}
    if not path:
        return cfg
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, val = line.partition("=")
        cfg[key.strip()] = val.strip()
    return cfg


def _merge(args, cfg):
    for key in ("field", "precision", "out", "seed", "format"):
        if getattr(args, key, None) in (None,) and key in cfg:
            setattr(args, key, cfg[key])
    return args


def _field_from_args(args) -> Field:
    if not args.field:
        raise FieldError("--field FILE is required")
    return parse_field_file(args.field,
                            precision_override=int(args.precision) if args.precision else None)


def _parse_x(field, args, m):
    if getattr(args, "x_rational", None):
        elements = []
        for tok in args.x_rational.split(","):
            coords = [Fraction(c) for c in tok.split(":")]
            if len(coords) != field.degree:
                raise FieldError("each rational coordinate needs d entries")
            elements.append(field.element(coords))
        if len(elements) != m:
            raise FieldError(f"need {m} coordinates")
        return dio.ExactPoint.from_field_vector(elements)
    if getattr(args, "x", None):
        rows = [[float(v) for v in row.split(",")] for row in args.x.split(";")]
        arr = np.array(rows)
        if arr.shape != (field.degree, m):
            raise FieldError(f"x must be d x m = {field.degree} x {m}")
        return KSVector.from_floats(field, arr)
    raise FieldError("provide --x or --x-rational")


def _write(args, text):
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _json_dumps(obj):
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# subcommands

def cmd_field(args):
    field = _field_from_args(args)
    _write(args, _json_dumps(field_report(field)))
    return EXIT_OK


def cmd_dirichlet(args):
    field = _field_from_args(args)
    x = _parse_x(field, args, args.m)
    qs = [float(q) for q in str(args.Q).split(",")]
    lines = []
    worst = EXIT_OK
    for Q in qs:
        try:
            sol = dio.dirichlet_solve(x, Q=Q, cap=args.cap)
            lines.append(json.dumps({
                "Q": Q,
                "value": float(sol.value),
                "q0": [str(c) for c in sol.q0.coords],
                "q": [[str(c) for c in qi.coords] for qi in sol.q],
                "house_q": sol.house_q(),
                "house_bound": sol.house_bound,
                "value_bound": sol.value_bound,
                "certified": sol.certified,
            }, sort_keys=True))
        except dio.NoSolutionInBox as exc:
            lines.append(json.dumps({"Q": Q, "error": str(exc)}, sort_keys=True))
            worst = max(worst, EXIT_INCONCLUSIVE)
        except dio.BudgetExceeded as exc:
            lines.append(json.dumps({"Q": Q, "error": str(exc)}, sort_keys=True))
            worst = max(worst, EXIT_INCONCLUSIVE)
    _write(args, "\n".join(lines) + "\n")
    return worst


def cmd_flow_trace(args):
    field = _field_from_args(args)
    x = _parse_x(field, args, args.m)
    xs = x.to_ks() if isinstance(x, dio.ExactPoint) else x
    n_steps = int(np.floor(args.t_max / args.step + 1e-9))
    grid = [i * args.step for i in range(n_steps + 1)]
    trace = flows.systole_trace(xs, grid, cap=args.cap)
    rows = trace.rows()
    if args.format == "json":
        text = "\n".join(json.dumps(r, sort_keys=True) for r in rows) + "\n"
    else:
        head = "t,delta,certified,witness,log_delta"
        body = [f"{r['t']},{r['delta']!r},{int(r['certified'])},{r['witness']},{r['log_delta']!r}"
                for r in rows]
        text = head + "\n" + "\n".join(body) + "\n"
    _write(args, text)
    return EXIT_OK if all(trace.certified) else EXIT_INCONCLUSIVE


def cmd_exponent(args):
    field = _field_from_args(args)
    x = _parse_x(field, args, args.m)
    t0, t1, n = args.t_min, args.t_max, args.points
    ratio = (t1 / t0) ** (1.0 / (n - 1))
    grid = [t0 * ratio**k for k in range(n)]
    try:
        est = dio.uniform_exponent_estimate(x, grid, cap=args.cap)
    except dio.BudgetExceeded as exc:
        _write(args, _json_dumps({"error": str(exc)}))
        return EXIT_INCONCLUSIVE
    table = "t,eta\n" + "\n".join(f"{t!r},{e!r}" for t, e in
                                  zip(est.t_values, est.eta_values)) + "\n"
    payload = {
        "omega_hat": est.omega_hat if est.omega_hat != float("inf") else "inf",
        "fit_window": list(est.fit_window),
        "residual": est.residual,
        "exact_relation": est.exact_relation,
        "unstable": est.unstable,
    }
    if args.format == "csv":
        _write(args, table)
    else:
        _write(args, _json_dumps(payload))
    return EXIT_OK


def cmd_construct(args):
    field = _field_from_args(args)
    surface = _parse_surface(field, args.surface)
    out = con.construct_singular(surface, zeta=args.zeta, phi=args.phi,
                                 stages=args.stages, variant=args.seed or 0)
    _write(args, _json_dumps(con.construction_to_json(out)))
    return EXIT_OK


def cmd_verify(args):
    data = json.loads(Path(args.certificate).read_text())
    out = con.construction_from_json(data)
    try:
        report = con.verify_certificate(out, eta_check=args.eta_check)
    except con.VerificationFailure as exc:
        _write(args, _json_dumps({"verified": False, "failure": str(exc)}))
        return EXIT_ERROR
    report["verified"] = True
    _write(args, _json_dumps(report))
    return EXIT_OK


def cmd_paucity(args):
    field = _field_from_args(args)
    report = flows.paucity_report(field, args.m, args.samples,
                                  t_max=args.t_max, eps=args.eps,
                                  step=args.step, cap=args.cap,
                                  seed=args.seed)
    _write(args, _json_dumps(report))
    return EXIT_OK if report["inconclusive_count"] == 0 else EXIT_INCONCLUSIVE


def _parse_surface(field, desc):
    kind, _, arg = desc.partition(":")
    if kind == "product":
        m = int(arg or 3)
        return con.product_surface(field, m=m)
    raise con.ConstructError(f"unknown surface descriptor {desc!r}")


# ---------------------------------------------------------------------------

def build_parser():
    p = _Parser(prog="ksdioph",
                description="Diophantine approximation over totally real fields")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, m_default=1):
        sp.add_argument("--field", help="field description file")
        sp.add_argument("--precision", type=int, help="bits")
        sp.add_argument("--out", help="output path (default stdout)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--config", help="key = value config file")
        sp.add_argument("--cap", type=int, default=4_000_000)
        sp.add_argument("--m", type=int, default=m_default)

    sp = sub.add_parser("field", help="field invariants report")
    common(sp)
    sp.set_defaults(func=cmd_field)

    sp = sub.add_parser("dirichlet", help="effective Dirichlet solver")
    common(sp)
    sp.add_argument("--x", help="point rows 'a,b;c,d' (d rows of m values)")
    sp.add_argument("--x-rational", help="exact K-vector 'c1:c2,...'")
    sp.add_argument("--Q", default="8", help="box size or comma sweep")
    sp.set_defaults(func=cmd_dirichlet)

    sp = sub.add_parser("flow-trace", help="systole trace of g_t u_x")
    common(sp)
    sp.add_argument("--x", help="point rows")
    sp.add_argument("--x-rational")
    sp.add_argument("--t-max", type=float, default=15.0)
    sp.add_argument("--step", type=float, default=0.25)
    sp.set_defaults(func=cmd_flow_trace)

    sp = sub.add_parser("exponent", help="uniform exponent estimate")
    common(sp)
    sp.add_argument("--x")
    sp.add_argument("--x-rational")
    sp.add_argument("--t-min", type=float, default=4.0)
    sp.add_argument("--t-max", type=float, default=64.0)
    sp.add_argument("--points", type=int, default=8)
    sp.set_defaults(func=cmd_exponent)

    sp = sub.add_parser("construct", help="build a singular vector on a surface")
    common(sp)
    sp.add_argument("--surface", default="product:3")
    sp.add_argument("--zeta", default="inv_pow:2",
                    help="'inv_pow:k' or 'exp_over_pow:nu'")
    sp.add_argument("--phi", default="house")
    sp.add_argument("--stages", type=int, default=5)
    sp.set_defaults(func=cmd_construct)

    sp = sub.add_parser("verify", help="re-check a construction certificate")
    common(sp)
    sp.add_argument("--certificate", required=True)
    sp.add_argument("--eta-check", action="store_true")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("paucity", help="Monte Carlo singularity fraction")
    common(sp)
    sp.add_argument("--samples", type=int, default=200)
    sp.add_argument("--t-max", type=float, default=15.0)
    sp.add_argument("--eps", type=float, default=0.1)
    sp.add_argument("--step", type=float, default=0.25)
    sp.set_defaults(func=cmd_paucity)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    args = _merge(args, _load_config(getattr(args, "config", None)))
    try:
        return args.func(args)
    except (FieldError, con.ConstructError, dio.DiophantineError) as exc:
        sys.stderr.write(f"{type(exc).__name__}: {exc}\n")
        return EXIT_ERROR
    except flows.Inconclusive as exc:
        sys.stderr.write(f"Inconclusive: {exc}\n")
        return EXIT_INCONCLUSIVE


if __name__ == "__main__":
    sys.exit(main())
