"""Command-line entry point ``dirichlet-ball``.

Every subcommand prints (or writes to ``--out``) a JSON report with the
schema tag ``dirichlet-ball/1``, or CSV when ``--format csv`` is given and
the command has tabular output. Exit status: 0 success, 1 error,
2 inconclusive numerical classification.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .errors import DirichletBallError, Inconclusive
from .parse import format_poly, parse_poly
from .poly2 import Poly2

SCHEMA = "dirichlet-ball/1"
EXIT_OK, EXIT_ERROR, EXIT_INCONCLUSIVE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which is reserved for Inconclusive here
    def error(self, message):
        raise UsageError(message)


def load_poly(source):
    """``--poly`` value: expression text, or ``@path`` to a JSON file.

    The JSON file holds coefficient records ``[{"k", "l", "re", "im"}, ...]``,
    an object with such a list under "p" or "coeffs", or an expression string.
    """
    if not source.startswith("@"):
        return parse_poly(source)
    with open(source[1:]) as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        data = data.get("p", data.get("coeffs", data.get("poly")))
    if isinstance(data, str):
        return parse_poly(data)
    if isinstance(data, list):
        return Poly2.from_records(data)
    raise ValueError(f"{source[1:]}: no polynomial found")


def _clean(obj):
    """JSON-safe copy: numpy scalars and arrays to Python, complex to [re, im], non-finite to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (complex, np.complexfloating)):
        return [_clean(obj.real), _clean(obj.imag)]
    if isinstance(obj, Poly2):
        return obj.to_records()
    return obj


def render_json(command, inputs, result, status="ok"):
    doc = {"schema": SCHEMA, "command": command, "status": status,
           "input": inputs, "result": result}
    return json.dumps(_clean(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(writer):
    """Run a ``write_csv(path)`` method and return its text."""
    fd, path = tempfile.mkstemp(suffix=".csv")
    os.close(fd)
    try:
        writer(path)
        with open(path) as fh:
            return fh.read()
    finally:
        os.unlink(path)


def _norm_csv(result):
    buf = io.StringIO()
    buf.write("alpha,norm_sq,norm\n")
    buf.write(f"{result['alpha']!r},{result['norm_sq']!r},{result['norm']!r}\n")
    return buf.getvalue()


# subcommands; each returns (result dict, csv-writer or None)


def cmd_norm(args, p):
    from .dalpha import norm_sq

    alpha = _alpha(args, 0.0)
    value = norm_sq(p, alpha)
    result = {"alpha": alpha, "norm_sq": value, "norm": math.sqrt(value)}
    if args.integral:
        from .ballquad import seminorm

        est = seminorm(p, alpha)
        result["integral_seminorm"] = {"value": est.value, "error": est.error}
    return result, lambda: _norm_csv(result)


def cmd_opa(args, p):
    from .opa import opa_curve

    curve = opa_curve(p, _alpha(args, 2.0), args.n_max)
    return curve.to_dict(), lambda: _csv_text(curve.write_csv)


def cmd_dilate(args, p):
    from .dilation import default_r_grid, dilation_sweep

    kw = {"cap": args.cap}
    if args.tol is not None:
        kw["tol"] = args.tol
    curve = dilation_sweep(p, _alpha(args, 2.0), r_grid=default_r_grid(args.k_max), **kw)
    return curve.to_dict(), lambda: _csv_text(curve.write_csv)


def cmd_zeros(args, p):
    from .boundary import classify_zero_set

    report = classify_zero_set(p, resolution=args.resolution, seed=args.seed)
    return report.to_dict(), lambda: _csv_text(report.write_csv)


def _parse_point(text):
    try:
        zeta, eta = (complex(part.strip().replace("i", "j")) for part in text.split(","))
    except ValueError as exc:
        raise UsageError(f"--point expects 'zeta,eta', got {text!r}") from exc
    return zeta, eta


def cmd_gamma(args, p):
    from .boundary import branch_gamma, sphere_zeros

    if args.point:
        point = _parse_point(args.point)
    else:
        zeros = sphere_zeros(p, args.resolution)
        if not zeros:
            raise ValueError("p has no zeros on the sphere")
        point = zeros[0]
    return branch_gamma(p, point).to_dict(), None


def cmd_lojasiewicz(args, p):
    from .boundary import classify_zero_set, lojasiewicz_fit

    report = classify_zero_set(p, resolution=args.resolution, seed=args.seed)
    fit = lojasiewicz_fit(p, report=report, n_samples=args.samples, seed=args.seed)
    return {"zero_set": report.kind, **fit.to_dict()}, None


def cmd_capacity(args, p):
    from .boundary import classify_zero_set
    from .capacity import Curve, capacity_scan

    alpha = _alpha(args, 1.75)
    grid = [int(n) for n in args.n_grid.split(",")]
    if p is None:
        source = Curve.model()
    else:
        source = classify_zero_set(p, resolution=args.resolution, seed=args.seed)
    report = capacity_scan(source, alpha, grid)
    return report.to_dict(), lambda: _csv_text(report.write_csv)


def cmd_classify(args, p):
    from .classify import classify

    if args.alpha is None:
        raise UsageError("classify requires --alpha")
    verdict = classify(p, args.alpha, seed=args.seed, resolution=args.resolution,
                       advisory=args.advisory)
    return verdict.to_dict(), None


COMMANDS = {
    "norm": (cmd_norm, "squared D_alpha norm from coefficients"),
    "opa": (cmd_opa, "optimal polynomial approximant distances"),
    "dilate": (cmd_dilate, "norms of p/p_r as r -> 1 with a growth fit"),
    "zeros": (cmd_zeros, "classify the zero set on the closed ball"),
    "gamma": (cmd_gamma, "Puiseux coefficient at a boundary zero"),
    "lojasiewicz": (cmd_lojasiewicz, "Lojasiewicz exponent on the sphere"),
    "capacity": (cmd_capacity, "minimized Riesz energies under sample doubling"),
    "classify": (cmd_classify, "cyclicity verdict"),
}


def _alpha(args, default):
    return default if args.alpha is None else args.alpha


def build_parser():
    parser = _Parser(prog="dirichlet-ball", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    for name, (_, helptext) in COMMANDS.items():
        sp = sub.add_parser(name, help=helptext, description=helptext)
        sp.add_argument("--poly", required=name != "capacity",
                        help="expression such as '1-2*z*w', or @file.json")
        sp.add_argument("--alpha", type=float, default=None)
        sp.add_argument("--out", default=None, help="write the report here instead of stdout")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--tol", type=float, default=None)
        if name in ("zeros", "gamma", "lojasiewicz", "capacity", "classify"):
            sp.add_argument("--resolution", type=int, default=16,
                            help="angle-grid points per axis for sphere zero search")
        if name == "norm":
            sp.add_argument("--integral", action="store_true",
                            help="also evaluate the ball-integral seminorm (-1 < alpha < 1)")
        if name == "opa":
            sp.add_argument("--n-max", type=int, default=20)
        if name == "dilate":
            sp.add_argument("--k-max", type=int, default=10, help="r = 1 - 2^-k for k = 1..k_max")
            sp.add_argument("--cap", type=int, default=32768, help="truncation order cap")
        if name == "gamma":
            sp.add_argument("--point", default=None, help="boundary zero as 'zeta,eta'")
        if name == "lojasiewicz":
            sp.add_argument("--samples", type=int, default=2 ** 17)
        if name == "capacity":
            sp.add_argument("--n-grid", default="64,128,256,512,1024,2048")
        if name == "classify":
            sp.add_argument("--advisory", action="store_true",
                            help="attach approximant and dilation cross-checks")
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"dirichlet-ball: {exc}\n")
        return EXIT_ERROR
    func = COMMANDS[args.command][0]
    inputs = {"poly": args.poly, "alpha": args.alpha, "seed": args.seed}
    try:
        p = load_poly(args.poly) if args.poly is not None else None
        if p is not None:
            inputs["poly"] = format_poly(p)
        result, csv_writer = func(args, p)
        if args.format == "csv":
            if csv_writer is None:
                raise UsageError(f"{args.command} has no CSV output")
            _emit(csv_writer(), args.out)
        else:
            _emit(render_json(args.command, inputs, result), args.out)
        return EXIT_OK
    except Inconclusive as exc:
        partial = exc.report.to_dict() if exc.report is not None else None
        _emit(render_json(args.command, inputs, {"message": str(exc), "partial": partial},
                          status="inconclusive"), args.out)
        sys.stderr.write(f"dirichlet-ball: inconclusive: {exc}\n")
        return EXIT_INCONCLUSIVE
    except BrokenPipeError:
        # reader closed early (e.g. piped into head); not an error of ours
        sys.stdout = open(os.devnull, "w")
        return EXIT_OK
    except (DirichletBallError, UsageError, ValueError, OSError, ArithmeticError) as exc:
        sys.stderr.write(f"dirichlet-ball: error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
