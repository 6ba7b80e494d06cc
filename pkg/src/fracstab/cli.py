"""Command-line interface: ``fracstab <subcommand> [options]``.

Exit codes: 0 success, 1 usage or parameter error, 2 numeric failure,
3 a definite verdict was required but the point is marginal. Every error is
reported as one JSON line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import bifurcation, charfun, dynamics, stability
from .errors import DomainError, MarginalProximity, NumericFailure, ParameterError, RangeError
from .params import OrderPair, SystemParams, check_coefficient

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_MARGINAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def fmt(x) -> str:
    """17 significant digits, the precision that round-trips a double."""
    return format(float(x), ".17g")


def to_json(obj) -> str:
    """Compact JSON with every float written through :func:`fmt`; non-finite floats become null."""
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return {None: "null", True: "true", False: "false"}[None if obj is None else bool(obj)]
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, complex):
        return to_json({"re": obj.real, "im": obj.imag})
    if isinstance(obj, dict):
        return "{" + ",".join(f"{to_json(str(k))}:{to_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(to_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def parse_complex(text: str) -> complex:
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected 're' or 're,im', got {text!r}")


def parse_window(text: str) -> tuple[float, float, float, float]:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        vals = ()
    if len(vals) != 4:
        raise argparse.ArgumentTypeError("window is re_min,re_max,im_min,im_max")
    return vals


def parse_grid(text: str) -> tuple[int, int]:
    parts = text.lower().replace("x", ",").split(",")
    try:
        vals = tuple(int(v) for v in parts)
    except ValueError:
        vals = ()
    if len(vals) == 1:
        vals = vals * 2
    if len(vals) != 2:
        raise argparse.ArgumentTypeError("grid is N or ROWSxCOLS")
    return vals


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fracstab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, help_text, needs_a=True, fmt_default="json"):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--alpha", type=float, required=True)
        p.add_argument("--beta", type=float, required=True)
        if needs_a:
            p.add_argument("--a", type=float, required=True)
        p.add_argument("--format", choices=("json", "csv"), default=fmt_default)
        p.add_argument("--out", help="write output here instead of stdout")
        return p

    p = command("simulate", "run the sequence representation")
    p.add_argument("--b", type=parse_complex, required=True)
    p.add_argument("--x0", type=parse_complex, default=complex(0.1))
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--residual", action="store_true", help="include the operator residual")

    p = command("verify", "check a simulated trajectory against the operator equation")
    p.add_argument("--b", type=parse_complex, required=True)
    p.add_argument("--x0", type=parse_complex, default=complex(0.1))
    p.add_argument("--n", type=int, default=100)

    p = command("boundary", "sample the boundary curve", fmt_default="csv")
    p.add_argument("--samples", type=int, default=4096)

    p = command("classify", "winding-number verdict for one b")
    p.add_argument("--b", type=parse_complex, required=True)
    p.add_argument("--samples", type=int, default=4096)
    p.add_argument("--curve", help="boundary CSV (theta,re,im) to use instead of sampling")

    command("interval", "real stability interval")

    p = command("regions", "classify a grid of b values")
    p.add_argument("--samples", type=int, default=4096)
    p.add_argument("--grid", type=parse_grid, default=(400, 400))
    p.add_argument("--window", type=parse_window)

    command("bifurcations", "closed-form bifurcation values and a3", needs_a=False)

    p = command("sweep", "sweep a downwards and report topology changes", needs_a=False)
    p.add_argument("--from", dest="a_from", type=float, required=True)
    p.add_argument("--to", dest="a_to", type=float, required=True)
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--samples", type=int, default=4096)
    p.add_argument("--grid", type=parse_grid, default=(200, 200))
    return parser


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def read_curve_csv(path: str, orders: OrderPair, a: float) -> charfun.BoundaryCurve:
    """Load a boundary CSV written by the ``boundary`` subcommand."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["theta", "re", "im"]:
            raise ParameterError(f"{path}: expected header theta,re,im")
        rows = [tuple(float(v) for v in r) for r in reader if r]
    if not rows:
        raise ParameterError(f"{path}: no samples")
    arr = np.array(rows)
    return charfun.BoundaryCurve(orders, a, arr[:, 0], arr[:, 1] + 1j * arr[:, 2])


def _orders(args) -> OrderPair:
    return OrderPair(args.alpha, args.beta)


def cmd_simulate(args):
    params = SystemParams(_orders(args), args.a, args.b, args.x0)
    traj = dynamics.simulate(params, args.n)
    if args.format == "csv":
        rows = [(n, fmt(v.real), fmt(v.imag)) for n, v in enumerate(traj.values)]
        return _csv_text(("n", "re", "im"), rows), EXIT_OK
    summary = {
        "verdict": dynamics.classify_trajectory(traj).value if args.n >= 100 else None,
        "max_abs": float(np.max(np.abs(traj.values))),
    }
    if args.residual:
        summary["residual"] = dynamics.residual(traj)
    return to_json(summary) + "\n", EXIT_OK


def cmd_verify(args):
    params = SystemParams(_orders(args), args.a, args.b, args.x0)
    res = dynamics.residual(dynamics.simulate(params, args.n))
    return to_json({"max_residual": res}) + "\n", EXIT_OK


def cmd_boundary(args):
    curve = charfun.sample_boundary(_orders(args), args.a, args.samples)
    if args.format == "json":
        return to_json({"theta": curve.thetas.tolist(), "re": curve.points.real.tolist(),
                        "im": curve.points.imag.tolist()}) + "\n", EXIT_OK
    rows = [(fmt(t), fmt(p.real), fmt(p.imag)) for t, p in zip(curve.thetas, curve.points)]
    return _csv_text(("theta", "re", "im"), rows), EXIT_OK


def cmd_classify(args):
    orders = _orders(args)
    if args.curve:
        curve = read_curve_csv(args.curve, orders, args.a)
    else:
        curve = stability.boundary_for(orders, check_coefficient(args.a), args.samples)
    verdict, w = stability.classify_on_curve(curve, args.b)
    out = {"alpha": orders.alpha, "beta": orders.beta, "a": args.a,
           "b": {"re": args.b.real, "im": args.b.imag}, "winding": w, "verdict": verdict.value}
    if args.format == "csv":
        text = _csv_text(("alpha", "beta", "a", "b_re", "b_im", "winding", "verdict"),
                         [(fmt(orders.alpha), fmt(orders.beta), fmt(args.a), fmt(args.b.real),
                           fmt(args.b.imag), "" if w is None else w, verdict.value)])
    else:
        text = to_json(out) + "\n"
    code = EXIT_MARGINAL if verdict is stability.Stability.MARGINAL else EXIT_OK
    return text, code


def cmd_interval(args):
    iv = stability.real_interval(_orders(args), args.a)
    if args.format == "csv":
        return _csv_text(("b_lo", "b_hi", "degenerate"),
                         [(fmt(iv.b_lo), fmt(iv.b_hi), str(iv.degenerate).lower())]), EXIT_OK
    return to_json({"b_lo": iv.b_lo, "b_hi": iv.b_hi, "degenerate": iv.degenerate}) + "\n", EXIT_OK


def cmd_regions(args):
    orders = _orders(args)
    curve = stability.boundary_for(orders, args.a, args.samples)
    rep = stability.scan_region(orders, args.a, window=args.window, grid=args.grid, curve=curve)
    V = np.asarray(rep.verdicts)
    if args.format == "csv":
        # verdict matrix: one row per Im b (ascending), one column per Re b
        header = ["im"] + [fmt(x) for x in rep.re_axis]
        rows = [[fmt(y)] + list(r) for y, r in zip(rep.im_axis, V)]
        return _csv_text(header, rows), EXIT_OK
    out = {
        "alpha": orders.alpha, "beta": orders.beta, "a": rep.a,
        "window": {"re_min": rep.window[0], "re_max": rep.window[1],
                   "im_min": rep.window[2], "im_max": rep.window[3]},
        "grid": {"rows": rep.grid[0], "cols": rep.grid[1]},
        "components": rep.components,
        "enclosed_unstable": stability.count_enclosed_unstable(rep),
        "representatives": [{"re": z.real, "im": z.imag} for z in rep.representatives],
        "rows": ["".join(r) for r in V],
    }
    return to_json(out) + "\n", EXIT_OK


def _bifurcation_dict(bs: bifurcation.BifurcationSet) -> dict:
    return {"alpha": bs.orders.alpha, "beta": bs.orders.beta, "a1": bs.a1, "a2": bs.a2,
            "a3": bs.a3, "a4": bs.a4, "theta_star": bs.theta_star}


def cmd_bifurcations(args):
    bs = bifurcation.bifurcation_set(_orders(args))
    return to_json(_bifurcation_dict(bs)) + "\n", EXIT_OK


def cmd_sweep(args):
    bs = bifurcation.sweep_bifurcations(_orders(args), args.a_from, args.a_to, step=args.step,
                                       refine_tol=args.tol, grid=args.grid, M=args.samples)
    events = [e.as_dict() for e in bs.events]
    if args.format == "csv":
        fields = list(bifurcation.TopologySignature.__dataclass_fields__)
        header = ["a"] + [f"before_{f}" for f in fields] + [f"after_{f}" for f in fields]
        rows = [[fmt(e["a"])] + [e["before"][f] for f in fields] + [e["after"][f] for f in fields]
                for e in events]
        return _csv_text(header, rows), EXIT_OK
    return to_json(events) + "\n", EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate, "verify": cmd_verify, "boundary": cmd_boundary,
    "classify": cmd_classify, "interval": cmd_interval, "regions": cmd_regions,
    "bifurcations": cmd_bifurcations, "sweep": cmd_sweep,
}


def _diagnose(kind: str, message: str, code: int) -> int:
    sys.stderr.write(to_json({"error": kind, "message": " ".join(str(message).split()),
                              "exit_code": code}) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        text, code = COMMANDS[args.command](args)
    except UsageError as exc:
        return _diagnose("usage", str(exc), EXIT_USAGE)
    except (ParameterError, DomainError, RangeError) as exc:
        return _diagnose(type(exc).__name__, str(exc), EXIT_USAGE)
    except MarginalProximity as exc:
        return _diagnose("MarginalProximity", str(exc), EXIT_MARGINAL)
    except NumericFailure as exc:
        return _diagnose(type(exc).__name__, str(exc), EXIT_NUMERIC)
    if args.out:
        with open(args.out, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)
    else:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            # reader closed early (e.g. piped into head); silence the flush at exit
            os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
    return code


if __name__ == "__main__":
    sys.exit(main())
